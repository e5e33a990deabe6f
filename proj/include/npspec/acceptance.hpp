#pragma once

#include <functional>
#include <string>
#include <vector>

namespace npspec::acceptance {

struct Result {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct Options {
  int jobs = 1;
  /// Criteria to run (1..10); empty runs all.
  std::vector<int> only;
  /// Directory holding the experiment configs; empty uses the one from the build.
  std::string config_dir;
  /// Called as each criterion finishes.
  std::function<void(const Result&)> on_result;
};

std::vector<Result> run(const Options& opts = {});

/// "PASS  3  title  detail" / "FAIL ..."
std::string format(const Result& r);

}  // namespace npspec::acceptance
