#pragma once

// Random SceneFacts generator plus a substring audit of the generated text.
// Shared by the prompt unit tests and the acceptance harness.

#include <regex>
#include <set>
#include <string>
#include <vector>

#include "upscaler/prompt/prompt.hpp"
#include "upscaler/rng.hpp"

namespace upscaler::test {

struct GeneratedFacts {
  prompt::SceneFacts facts;
  bool expect_valid = true;
  // Information deliberately kept out of the facts (hidden numbers, away-kit
  // team names, hidden player names). None of it may surface in the text.
  std::vector<std::string> withheld;
};

inline const std::vector<std::string>& colour_words() {
  static const std::vector<std::string> w{"red", "white", "black", "blue", "green", "yellow", "orange",
                                          "sky blue", "red and black striped", "black and blue striped", "maroon"};
  return w;
}

inline const std::vector<std::string>& action_words() {
  static const std::vector<std::string> w{"diving low to make a save", "sprinting down the wing", "heading the ball",
                                          "celebrating a goal", "attempting to score", "blocking a shot",
                                          "raising a flag", "signalling a foul", "watching the play"};
  return w;
}

inline std::string random_word(Rng& rng, std::size_t len) {
  std::string s(1, static_cast<char>('A' + rng.uniform_int(0, 25)));
  for (std::size_t i = 1; i < len; ++i) s += static_cast<char>('a' + rng.uniform_int(0, 25));
  return s;
}

// About one case in five breaks a rule on purpose; everything else is valid.
inline GeneratedFacts random_facts(Rng& rng) {
  GeneratedFacts g;
  const auto& colours = colour_words();
  const auto& actions = action_words();
  const int n = static_cast<int>(rng.uniform_int(1, 5));
  std::set<int> used_numbers;
  const bool break_rule = rng.bernoulli(0.2);
  const int broken_index = static_cast<int>(rng.uniform_int(0, n - 1));
  for (int i = 0; i < n; ++i) {
    prompt::Individual ind;
    ind.role = static_cast<prompt::Role>(rng.uniform_int(0, 4));
    ind.is_home_kit = rng.bernoulli(0.5);
    ind.jersey_color = colours[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(colours.size()) - 1))];
    ind.shorts_color = colours[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(colours.size()) - 1))];
    ind.action = actions[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(actions.size()) - 1))];
    int number = 0;
    do number = static_cast<int>(rng.uniform_int(1, 99));
    while (used_numbers.count(number));
    used_numbers.insert(number);
    ind.number_visible = rng.bernoulli(0.5);
    if (ind.number_visible) ind.jersey_number = number;  // hidden ones are caught by the digit scan

    const auto team = "Club" + random_word(rng, 6);
    if (ind.is_home_kit && rng.bernoulli(0.7)) ind.team_name = team;
    else if (!ind.is_home_kit) g.withheld.push_back(team);

    const auto name = "Pl" + random_word(rng, 7);
    ind.name_visible = rng.bernoulli(0.3);
    if (ind.name_visible) ind.player_name = name;
    else g.withheld.push_back(name);

    if (rng.bernoulli(0.5)) ind.hair = static_cast<prompt::Hair>(rng.uniform_int(0, 5));
    if (rng.bernoulli(0.3)) {
      const auto& tones = prompt::SkinToneVocabulary::builtin().entries();
      auto it = tones.begin();
      std::advance(it, rng.uniform_int(0, static_cast<std::int64_t>(tones.size()) - 1));
      ind.skin_tone_descriptor = *it;
    }

    if (break_rule && i == broken_index) {
      g.expect_valid = false;
      switch (rng.uniform_int(0, 3)) {
        case 0:  // hidden number supplied anyway
          ind.number_visible = false;
          ind.jersey_number = number;
          break;
        case 1:  // team name on an away kit
          ind.is_home_kit = false;
          ind.team_name = team;
          break;
        case 2:  // name not clearly visible
          ind.name_visible = false;
          ind.player_name = name;
          break;
        default:
          ind.action = "  ";
          break;
      }
    }
    g.facts.individuals.push_back(std::move(ind));
  }
  g.facts.background.occupancy = static_cast<prompt::Occupancy>(rng.uniform_int(0, 2));
  g.facts.background.blurred = rng.bernoulli(0.5);
  const int marks = static_cast<int>(rng.uniform_int(0, 4));
  for (int m = 0; m < marks; ++m) {
    prompt::Landmark mark;
    mark.kind = static_cast<prompt::Landmark::Kind>(rng.uniform_int(0, 5));
    if (mark.kind == prompt::Landmark::Kind::other) mark.text = "the " + random_word(rng, 5) + " stand";
    g.facts.background.landmarks.push_back(mark);
  }
  if (rng.bernoulli(0.3)) g.facts.spatial_notes = "the ball is near the penalty spot";
  return g;
}

// Returns every audit failure for `text` generated from `g`; empty means clean.
inline std::vector<std::string> audit_text(const GeneratedFacts& g, const std::string& text) {
  std::vector<std::string> problems;
  std::set<int> visible;
  for (const auto& ind : g.facts.individuals) {
    if (ind.number_visible && ind.jersey_number) {
      visible.insert(*ind.jersey_number);
      if (text.find("number " + std::to_string(*ind.jersey_number)) == std::string::npos)
        problems.push_back("visible number " + std::to_string(*ind.jersey_number) + " missing");
    }
    if (ind.team_name && ind.is_home_kit && text.find(*ind.team_name) == std::string::npos)
      problems.push_back("home team " + *ind.team_name + " missing");
    if (!ind.is_home_kit && ind.team_name && text.find(*ind.team_name) != std::string::npos)
      problems.push_back("away team " + *ind.team_name + " leaked");
  }
  // Any digits at all must belong to a visible number.
  static const std::regex digits("[0-9]+");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), digits); it != std::sregex_iterator(); ++it) {
    if (!visible.count(std::stoi(it->str()))) problems.push_back("unexpected digits '" + it->str() + "'");
  }
  for (const auto& w : g.withheld) {
    if (text.find(w) != std::string::npos) problems.push_back("withheld '" + w + "' leaked");
  }
  if (text.find(prompt::occupancy_sentence(g.facts.background.occupancy)) == std::string::npos)
    problems.push_back("occupancy phrase missing");
  return problems;
}

}  // namespace upscaler::test
