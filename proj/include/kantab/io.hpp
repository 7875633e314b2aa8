#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "kantab/chain.hpp"
#include "kantab/control.hpp"
#include "kantab/dynsys.hpp"
#include "kantab/refine.hpp"

namespace kantab::io {

inline constexpr std::string_view kChainSchema = "kantab.chain/1";
inline constexpr std::string_view kSystemSchema = "kantab.system/1";

/// Chain document:
///   {"schema": "kantab.chain/1",
///    "alphabet": ["0", "1"],
///    "states": [{"id": "a", "label": "0"}, ...],
///    "initial": {"a": "0.5", ...},                       // missing ids are 0
///    "transitions": {"dense": [["0.5", "0.5"], ...]}     // or
///    "transitions": {"sparse": [["a", "b", "0.5"], ...]}}
/// Probabilities are decimal strings (JSON numbers are accepted too).
/// Unknown fields are rejected. Throws Parse or Validation errors.
LabeledMarkovChain parse_chain(std::string_view text, std::string_view source = "<chain>");
LabeledMarkovChain load_chain(const std::string& path);

/// Serializes with shortest round-trip decimal strings and dense rows.
std::string serialize_chain(const LabeledMarkovChain& chain,
                            const std::vector<std::string>& state_ids = {});
void save_chain(const std::string& path, const LabeledMarkovChain& chain,
                const std::vector<std::string>& state_ids = {});

/// System document:
///   {"schema": "kantab.system/1",
///    "name": "...",
///    "alphabet": ["0", "1"],
///    "box": {"lower": [0, 0], "upper": [2, 1]},
///    "regions": [{"name": "P1", "lower": [...], "upper": [...],
///                 "matrix": [[1, 0], [0, 1]], "offset": [0, 0], "label": "0"}],
///    "default": {"matrix": ..., "offset": ..., "label": "1"},          // optional
///    "control": {"dimension": 1, "actions": [0, 0.25, 0.5],
///                "reward_label": "0"}}                                  // optional
/// Regions are half-open boxes, closed on the upper face of the space.
struct SystemDocument {
  DynamicalSystem system;
  std::optional<ControlledSystem> controlled;
};

SystemDocument parse_system(std::string_view text, std::string_view source = "<system>");
SystemDocument load_system(const std::string& path);

/// Built-in benchmark as a system document (round-trips through parse_system).
std::string benchmark_system_document();

std::string format_probability(double p);

nlohmann::json trace_to_json(const DynamicalSystem& sys, const RefinementTrace& trace);
nlohmann::json control_to_json(const DynamicalSystem& sys, const ControlReport& report);
std::string format_control_table(const DynamicalSystem& sys, const ControlReport& report);

/// State ids for an abstraction chain: the partition words.
std::vector<std::string> word_ids(const Abstraction& abs);

}  // namespace kantab::io
