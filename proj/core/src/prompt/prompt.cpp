#include "upscaler/prompt/prompt.hpp"

#include <cctype>
#include <map>

#include "upscaler/error.hpp"

namespace upscaler::prompt {

namespace {

bool blank(std::string_view s) { return s.find_first_not_of(" \t\r\n") == std::string_view::npos; }

std::string article_for(std::string_view word) {
  if (word.empty()) return "a";
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(word.front())));
  return (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') ? "an" : "a";
}

std::string with_article(const std::string& phrase) { return article_for(phrase) + " " + phrase; }

std::string capitalize(std::string s) {
  if (!s.empty()) s.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(s.front())));
  return s;
}

std::string as_sentence(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  s = capitalize(std::move(s));
  if (!s.empty() && s.back() != '.' && s.back() != '!' && s.back() != '?') s.push_back('.');
  return s;
}

std::string strip_trailing_period(std::string s) {
  while (!s.empty() && (s.back() == '.' || std::isspace(static_cast<unsigned char>(s.back())))) s.pop_back();
  return s;
}

// "is diving" stays as written; a bare "diving" gains the auxiliary.
std::string verb_phrase(const std::string& action) {
  std::string a = strip_trailing_period(action);
  if (a.rfind("is ", 0) == 0 || a.rfind("are ", 0) == 0) return a;
  return "is " + a;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += (i + 1 == items.size()) ? " and " : ", ";
    out += items[i];
  }
  return out;
}

std::string count_word(std::size_t n) {
  static constexpr const char* kWords[] = {"zero",    "one",     "two",       "three",    "four",     "five",    "six",
                                           "seven",   "eight",   "nine",      "ten",      "eleven",   "twelve",  "thirteen",
                                           "fourteen", "fifteen", "sixteen",  "seventeen", "eighteen", "nineteen", "twenty"};
  return n <= 20 ? kWords[n] : "more than twenty";
}

std::string role_noun(Role role, std::size_t count) {
  std::string noun(to_string(role));
  return count == 1 ? noun : noun + "s";
}

std::string hair_phrase(Hair hair) {
  switch (hair) {
    case Hair::bald: return "a bald head";
    case Hair::short_hair: return "short hair";
    case Hair::long_hair: return "long hair";
    case Hair::braids: return "braided hair";
    case Hair::ponytail: return "a ponytail";
    case Hair::other: return "a distinctive hairstyle";
  }
  return "short hair";
}

std::string landmark_phrase(const Landmark& mark) {
  switch (mark.kind) {
    case Landmark::Kind::billboards: return "advertising boards";
    case Landmark::Kind::goalposts: return "the goalposts";
    case Landmark::Kind::corner_flag: return "the corner flag";
    case Landmark::Kind::net: return "the net";
    case Landmark::Kind::field_markings: return "field markings";
    case Landmark::Kind::other: return strip_trailing_period(mark.text);
  }
  return {};
}

// Kit-team attribution is allowed only on a home kit (validated upstream).
std::string team_clause(const Individual& ind) {
  if (ind.is_home_kit && ind.team_name && !blank(*ind.team_name)) return " from " + *ind.team_name;
  return {};
}

std::string name_clause(const Individual& ind) {
  if (ind.name_visible && ind.player_name && !blank(*ind.player_name)) return " named " + *ind.player_name;
  return {};
}

std::string number_clause(const Individual& ind, std::string_view lead) {
  if (ind.number_visible && ind.jersey_number) return std::string(lead) + "the number " + std::to_string(*ind.jersey_number);
  return {};
}

std::vector<std::string> appearance(const Individual& ind) {
  std::vector<std::string> parts;
  if (ind.hair) parts.push_back(hair_phrase(*ind.hair));
  if (ind.skin_tone_descriptor) parts.push_back(*ind.skin_tone_descriptor + " skin tone");
  return parts;
}

std::string background_sentence(const Background& bg, bool prompt_style) {
  std::vector<std::string> marks;
  for (const auto& m : bg.landmarks) marks.push_back(landmark_phrase(m));
  if (prompt_style) {
    std::string s = "The scene unfolds on a soccer field";
    if (!marks.empty()) s += std::string(", with the ") + (bg.blurred ? "blurred " : "") + "background featuring " + join(marks);
    return s + ".";
  }
  if (marks.empty()) return {};
  return std::string("The ") + (bg.blurred ? "out-of-focus " : "") + "background shows " + join(marks) + ".";
}

void require_or_throw(const SceneFacts& facts, const SkinToneVocabulary& vocabulary) {
  const auto report = validate_facts(facts, vocabulary);
  if (!report.ok()) {
    throw_error(ErrorCode::validation_error,
                "scene facts violate " + std::to_string(report.violations.size()) + " captioning rule(s)", report.lines());
  }
}

}  // namespace

std::vector<std::string> ValidationReport::lines() const {
  std::vector<std::string> out;
  for (const auto& v : violations) out.push_back(v.field + ": " + v.message + " [" + v.rule + "]");
  return out;
}

ValidationReport validate_facts(const SceneFacts& facts, const SkinToneVocabulary& vocabulary) {
  ValidationReport report;
  auto add = [&](std::string field, std::string rule, std::string message) {
    report.violations.push_back({std::move(field), std::move(rule), std::move(message)});
  };
  if (facts.individuals.empty()) add("individuals", "individuals_required", "at least one visible individual is required");
  for (std::size_t i = 0; i < facts.individuals.size(); ++i) {
    const auto& ind = facts.individuals[i];
    const std::string base = "individuals[" + std::to_string(i) + "]";
    if (ind.jersey_number) {
      if (!ind.number_visible) {
        add(base + ".jersey_number", "number_visibility", "jersey number given but not marked fully visible");
      }
      if (*ind.jersey_number < 1 || *ind.jersey_number > 99) {
        add(base + ".jersey_number", "number_range", "jersey number must be between 1 and 99");
      }
    }
    if (ind.player_name && !ind.name_visible) {
      add(base + ".player_name", "name_visibility", "player name given but not marked clearly visible");
    }
    if (ind.team_name && !ind.is_home_kit) {
      add(base + ".team_name", "team_home_kit", "team name may only accompany a home kit");
    }
    if (blank(ind.action)) add(base + ".action", "action_required", "action must be described");
    if (blank(ind.jersey_color)) add(base + ".jersey_color", "kit_colors_required", "jersey color must be described");
    if (blank(ind.shorts_color)) add(base + ".shorts_color", "kit_colors_required", "shorts color must be described");
    if (ind.skin_tone_descriptor && !vocabulary.contains(*ind.skin_tone_descriptor)) {
      add(base + ".skin_tone_descriptor", "neutral_skin_tone",
          "'" + *ind.skin_tone_descriptor + "' is not in the neutral descriptor vocabulary");
    }
  }
  for (std::size_t i = 0; i < facts.background.landmarks.size(); ++i) {
    const auto& mark = facts.background.landmarks[i];
    if (mark.kind == Landmark::Kind::other && blank(mark.text)) {
      add("background.landmarks[" + std::to_string(i) + "]", "landmark_text", "custom landmark needs a description");
    }
  }
  return report;
}

void require_valid(const SceneFacts& facts, const SkinToneVocabulary& vocabulary) { require_or_throw(facts, vocabulary); }

std::string occupancy_sentence(Occupancy occupancy) {
  switch (occupancy) {
    case Occupancy::empty: return "The stadium is empty (no spectators).";
    case Occupancy::half_full: return "The stadium is half full (moderate crowd).";
    case Occupancy::full: return "The stadium is at full capacity (sold-out stadium).";
  }
  return {};
}

std::string build_prompt(const SceneFacts& facts, const SkinToneVocabulary& vocabulary) {
  require_or_throw(facts, vocabulary);
  std::vector<std::string> sentences;
  std::map<Role, int> seen;
  for (const auto& ind : facts.individuals) {
    const bool first_of_role = seen[ind.role]++ == 0;
    std::string s = (first_of_role ? with_article(std::string(to_string(ind.role))) : "Another " + std::string(to_string(ind.role)));
    s += name_clause(ind) + team_clause(ind);
    s += " wearing " + with_article(ind.jersey_color + " jersey") + " and ";
    s += ind.shorts_color == ind.jersey_color ? "matching shorts" : ind.shorts_color + " shorts";
    s += number_clause(ind, " with ");
    const auto looks = appearance(ind);
    if (!looks.empty()) s += ", with " + join(looks) + ",";
    s += " " + verb_phrase(ind.action);
    sentences.push_back(as_sentence(s));
  }
  if (facts.spatial_notes && !blank(*facts.spatial_notes)) sentences.push_back(as_sentence(*facts.spatial_notes));
  sentences.push_back(background_sentence(facts.background, true));
  sentences.push_back(occupancy_sentence(facts.background.occupancy));

  std::string text;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    if (!text.empty()) text += ' ';
    text += s;
  }
  return text;
}

std::string build_caption(const SceneFacts& facts, const SkinToneVocabulary& vocabulary) {
  require_or_throw(facts, vocabulary);
  std::vector<std::string> sentences;

  // Identification first: how many people and in which roles.
  std::vector<Role> order;
  std::map<Role, std::size_t> counts;
  for (const auto& ind : facts.individuals) {
    if (counts[ind.role]++ == 0) order.push_back(ind.role);
  }
  const std::size_t total = facts.individuals.size();
  std::vector<std::string> groups;
  for (Role r : order) groups.push_back(count_word(counts[r]) + " " + role_noun(r, counts[r]));
  if (total == 1) {
    sentences.push_back("The image shows one individual, " + with_article(std::string(to_string(order.front()))) + ".");
  } else {
    sentences.push_back("The image shows " + count_word(total) + " individuals: " + join(groups) + ".");
  }

  std::map<Role, int> seen;
  for (const auto& ind : facts.individuals) {
    const bool first_of_role = seen[ind.role]++ == 0;
    std::string s = first_of_role ? with_article(std::string(to_string(ind.role))) : "Another " + std::string(to_string(ind.role));
    s += name_clause(ind) + team_clause(ind) + ",";
    const auto looks = appearance(ind);
    if (!looks.empty()) s += " with " + join(looks) + ",";
    s += " in " + with_article(ind.jersey_color + " jersey") + " with " + ind.shorts_color + " shorts,";
    const auto number = number_clause(ind, " marked with ");
    if (!number.empty()) s += number + ",";
    s += " " + verb_phrase(ind.action);
    sentences.push_back(as_sentence(s));
  }
  if (facts.spatial_notes && !blank(*facts.spatial_notes)) sentences.push_back(as_sentence(*facts.spatial_notes));
  sentences.push_back(background_sentence(facts.background, false));
  sentences.push_back(occupancy_sentence(facts.background.occupancy));

  std::string text;
  for (const auto& s : sentences) {
    if (s.empty()) continue;
    if (!text.empty()) text += ' ';
    text += s;
  }
  return text;
}

nlohmann::json to_json(const ValidationReport& report) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& v : report.violations) list.push_back({{"field", v.field}, {"rule", v.rule}, {"message", v.message}});
  return {{"ok", report.ok()}, {"violations", std::move(list)}};
}

}  // namespace upscaler::prompt
