#include "upscaler/prompt/scene.hpp"

#include <fstream>
#include <sstream>

#include "upscaler/error.hpp"

namespace upscaler::prompt {

namespace {

#include "skin_tones.inc"

using nlohmann::json;

constexpr std::pair<Role, std::string_view> kRoles[] = {
    {Role::player, "player"}, {Role::goalkeeper, "goalkeeper"}, {Role::referee, "referee"},
    {Role::coach, "coach"},   {Role::spectator, "spectator"},
};
constexpr std::pair<Hair, std::string_view> kHair[] = {
    {Hair::bald, "bald"},     {Hair::short_hair, "short"},   {Hair::long_hair, "long"},
    {Hair::braids, "braids"}, {Hair::ponytail, "ponytail"}, {Hair::other, "other"},
};
constexpr std::pair<Occupancy, std::string_view> kOccupancy[] = {
    {Occupancy::empty, "empty"}, {Occupancy::half_full, "half_full"}, {Occupancy::full, "full"}};
constexpr std::pair<Landmark::Kind, std::string_view> kLandmarks[] = {
    {Landmark::Kind::billboards, "billboards"},   {Landmark::Kind::goalposts, "goalposts"},
    {Landmark::Kind::corner_flag, "corner_flag"}, {Landmark::Kind::net, "net"},
    {Landmark::Kind::field_markings, "field_markings"},
};

template <class Enum, std::size_t N>
Enum parse_enum(const std::pair<Enum, std::string_view> (&table)[N], const json& value, const std::string& field) {
  if (!value.is_string()) throw_error(ErrorCode::validation_error, field + " must be a string", {field + ": expected string"});
  const auto text = value.get<std::string>();
  for (const auto& [e, name] : table)
    if (name == text) return e;
  throw_error(ErrorCode::validation_error, field + ": unknown value '" + text + "'", {field + ": unknown value '" + text + "'"});
}

template <class Enum, std::size_t N>
std::string_view enum_name(const std::pair<Enum, std::string_view> (&table)[N], Enum e) {
  for (const auto& [k, name] : table)
    if (k == e) return name;
  return "unknown";
}

std::optional<std::string> optional_string(const json& obj, const char* key, const std::string& field) {
  if (!obj.contains(key) || obj[key].is_null()) return std::nullopt;
  if (!obj[key].is_string()) throw_error(ErrorCode::validation_error, field + " must be a string", {field + ": expected string"});
  return obj[key].get<std::string>();
}

std::string required_string(const json& obj, const char* key, const std::string& field) {
  auto value = optional_string(obj, key, field);
  return value.value_or(std::string{});
}

bool flag(const json& obj, const char* key, const std::string& field) {
  if (!obj.contains(key) || obj[key].is_null()) return false;
  if (!obj[key].is_boolean()) throw_error(ErrorCode::validation_error, field + " must be a boolean", {field + ": expected boolean"});
  return obj[key].get<bool>();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

std::string_view to_string(Role role) noexcept { return enum_name(kRoles, role); }
std::string_view to_string(Hair hair) noexcept { return enum_name(kHair, hair); }
std::string_view to_string(Occupancy occupancy) noexcept { return enum_name(kOccupancy, occupancy); }

const SkinToneVocabulary& SkinToneVocabulary::builtin() {
  static const SkinToneVocabulary vocab = parse(kBuiltinSkinTones);
  return vocab;
}

SkinToneVocabulary SkinToneVocabulary::parse(std::string_view text) {
  SkinToneVocabulary vocab;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto entry = trim(line);
    if (entry.empty() || entry.front() == '#') continue;
    vocab.entries_.insert(entry);
  }
  return vocab;
}

SkinToneVocabulary SkinToneVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorCode::io_error, "cannot open skin-tone vocabulary " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool SkinToneVocabulary::contains(std::string_view descriptor) const { return entries_.contains(descriptor); }

SceneFacts facts_from_json(const json& doc) {
  if (!doc.is_object()) throw_error(ErrorCode::validation_error, "scene facts must be a JSON object", {"$: expected object"});
  SceneFacts facts;
  if (doc.contains("individuals")) {
    const auto& list = doc["individuals"];
    if (!list.is_array()) throw_error(ErrorCode::validation_error, "individuals must be an array", {"individuals: expected array"});
    for (std::size_t i = 0; i < list.size(); ++i) {
      const auto& item = list[i];
      const std::string base = "individuals[" + std::to_string(i) + "]";
      if (!item.is_object()) throw_error(ErrorCode::validation_error, base + " must be an object", {base + ": expected object"});
      Individual ind;
      ind.role = item.contains("role") ? parse_enum(kRoles, item["role"], base + ".role") : Role::player;
      ind.team_name = optional_string(item, "team_name", base + ".team_name");
      ind.is_home_kit = flag(item, "is_home_kit", base + ".is_home_kit");
      ind.jersey_color = required_string(item, "jersey_color", base + ".jersey_color");
      ind.shorts_color = required_string(item, "shorts_color", base + ".shorts_color");
      if (item.contains("jersey_number") && !item["jersey_number"].is_null()) {
        if (!item["jersey_number"].is_number_integer()) {
          throw_error(ErrorCode::validation_error, base + ".jersey_number must be an integer",
                      {base + ".jersey_number: expected integer"});
        }
        ind.jersey_number = item["jersey_number"].get<int>();
      }
      ind.number_visible = flag(item, "number_visible", base + ".number_visible");
      ind.player_name = optional_string(item, "player_name", base + ".player_name");
      ind.name_visible = flag(item, "name_visible", base + ".name_visible");
      if (item.contains("hair") && !item["hair"].is_null()) ind.hair = parse_enum(kHair, item["hair"], base + ".hair");
      ind.skin_tone_descriptor = optional_string(item, "skin_tone_descriptor", base + ".skin_tone_descriptor");
      ind.action = required_string(item, "action", base + ".action");
      facts.individuals.push_back(std::move(ind));
    }
  }
  if (doc.contains("background") && !doc["background"].is_null()) {
    const auto& bg = doc["background"];
    if (!bg.is_object()) throw_error(ErrorCode::validation_error, "background must be an object", {"background: expected object"});
    if (bg.contains("occupancy")) facts.background.occupancy = parse_enum(kOccupancy, bg["occupancy"], "background.occupancy");
    facts.background.blurred = flag(bg, "blurred", "background.blurred");
    if (bg.contains("landmarks")) {
      const auto& marks = bg["landmarks"];
      if (!marks.is_array()) {
        throw_error(ErrorCode::validation_error, "background.landmarks must be an array", {"background.landmarks: expected array"});
      }
      for (std::size_t i = 0; i < marks.size(); ++i) {
        const std::string field = "background.landmarks[" + std::to_string(i) + "]";
        Landmark mark;
        if (marks[i].is_object() && marks[i].contains("other")) {
          mark.kind = Landmark::Kind::other;
          mark.text = required_string(marks[i], "other", field + ".other");
        } else {
          mark.kind = parse_enum(kLandmarks, marks[i], field);
        }
        facts.background.landmarks.push_back(std::move(mark));
      }
    }
  }
  facts.spatial_notes = optional_string(doc, "spatial_notes", "spatial_notes");
  return facts;
}

json to_json(const SceneFacts& facts) {
  json individuals = json::array();
  for (const auto& ind : facts.individuals) {
    json item = {
        {"role", to_string(ind.role)},
        {"is_home_kit", ind.is_home_kit},
        {"jersey_color", ind.jersey_color},
        {"shorts_color", ind.shorts_color},
        {"number_visible", ind.number_visible},
        {"name_visible", ind.name_visible},
        {"action", ind.action},
    };
    if (ind.team_name) item["team_name"] = *ind.team_name;
    if (ind.jersey_number) item["jersey_number"] = *ind.jersey_number;
    if (ind.player_name) item["player_name"] = *ind.player_name;
    if (ind.hair) item["hair"] = to_string(*ind.hair);
    if (ind.skin_tone_descriptor) item["skin_tone_descriptor"] = *ind.skin_tone_descriptor;
    individuals.push_back(std::move(item));
  }
  json landmarks = json::array();
  for (const auto& mark : facts.background.landmarks) {
    if (mark.kind == Landmark::Kind::other) {
      landmarks.push_back({{"other", mark.text}});
    } else {
      landmarks.push_back(enum_name(kLandmarks, mark.kind));
    }
  }
  json doc = {
      {"individuals", std::move(individuals)},
      {"background",
       {{"occupancy", to_string(facts.background.occupancy)},
        {"landmarks", std::move(landmarks)},
        {"blurred", facts.background.blurred}}},
  };
  if (facts.spatial_notes) doc["spatial_notes"] = *facts.spatial_notes;
  return doc;
}

}  // namespace upscaler::prompt
