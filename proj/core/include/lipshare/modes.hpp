#pragma once

#include <string>
#include <vector>

namespace lipshare {

// Per-sample (or per-frame) discrete mode labels, 0-based.
struct ModeAssignment {
  enum class Source { viterbi, filtered, truth, random };

  std::vector<int> states;
  Source source = Source::truth;

  std::size_t size() const { return states.size(); }
};

const char* to_string(ModeAssignment::Source s);

// CSV with header index,mode.
void save_modes_csv(const ModeAssignment& modes, const std::string& path);
ModeAssignment load_modes_csv(const std::string& path);

}  // namespace lipshare
