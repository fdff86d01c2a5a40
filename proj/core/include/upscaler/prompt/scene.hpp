#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace upscaler::prompt {

enum class Role { player, goalkeeper, referee, coach, spectator };
enum class Hair { bald, short_hair, long_hair, braids, ponytail, other };
enum class Occupancy { empty, half_full, full };

struct Landmark {
  enum class Kind { billboards, goalposts, corner_flag, net, field_markings, other };
  Kind kind = Kind::field_markings;
  std::string text;  // only for Kind::other

  friend bool operator==(const Landmark&, const Landmark&) = default;
};

struct Individual {
  Role role = Role::player;
  std::optional<std::string> team_name;
  bool is_home_kit = false;
  std::string jersey_color;
  std::string shorts_color;
  std::optional<int> jersey_number;
  bool number_visible = false;
  std::optional<std::string> player_name;
  bool name_visible = false;
  std::optional<Hair> hair;
  std::optional<std::string> skin_tone_descriptor;
  std::string action;

  friend bool operator==(const Individual&, const Individual&) = default;
};

struct Background {
  Occupancy occupancy = Occupancy::half_full;
  std::vector<Landmark> landmarks;
  bool blurred = false;  // background out of focus in the source frame

  friend bool operator==(const Background&, const Background&) = default;
};

// What the broadcast operator knows about a cutout.
struct SceneFacts {
  std::vector<Individual> individuals;
  Background background;
  std::optional<std::string> spatial_notes;

  friend bool operator==(const SceneFacts&, const SceneFacts&) = default;
};

std::string_view to_string(Role role) noexcept;
std::string_view to_string(Hair hair) noexcept;
std::string_view to_string(Occupancy occupancy) noexcept;

// Accepted skin-tone descriptors. The shipped list comes from
// core/data/skin_tones.txt; deployments may load their own.
class SkinToneVocabulary {
 public:
  static const SkinToneVocabulary& builtin();
  static SkinToneVocabulary parse(std::string_view text);
  static SkinToneVocabulary load(const std::filesystem::path& path);

  bool contains(std::string_view descriptor) const;
  const std::set<std::string, std::less<>>& entries() const noexcept { return entries_; }

 private:
  std::set<std::string, std::less<>> entries_;
};

/// Throws validation-error when a field has the wrong type or an unknown enum value.
SceneFacts facts_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const SceneFacts& facts);

}  // namespace upscaler::prompt
