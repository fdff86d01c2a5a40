#pragma once

#include <string>
#include <vector>

#include "upscaler/prompt/scene.hpp"

namespace upscaler::prompt {

struct Violation {
  std::string field;  // e.g. "individuals[0].jersey_number"
  std::string rule;   // stable rule id, e.g. "number_visibility"
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  /// "field: message" lines, used as Error details.
  std::vector<std::string> lines() const;
};

ValidationReport validate_facts(const SceneFacts& facts,
                                const SkinToneVocabulary& vocabulary = SkinToneVocabulary::builtin());

/// Throws validation-error listing the offending fields.
void require_valid(const SceneFacts& facts, const SkinToneVocabulary& vocabulary = SkinToneVocabulary::builtin());

/// Generation prompt: one sentence per individual (role, kit, visible number,
/// action), then spatial notes, then background landmarks and occupancy.
std::string build_prompt(const SceneFacts& facts,
                         const SkinToneVocabulary& vocabulary = SkinToneVocabulary::builtin());

/// Dataset caption: opens with the count and roles of everyone visible, then
/// describes each individual's kit, visible number and action, then the background.
std::string build_caption(const SceneFacts& facts,
                          const SkinToneVocabulary& vocabulary = SkinToneVocabulary::builtin());

/// Fixed occupancy phrasing shared by prompts and captions.
std::string occupancy_sentence(Occupancy occupancy);

nlohmann::json to_json(const ValidationReport& report);

}  // namespace upscaler::prompt
