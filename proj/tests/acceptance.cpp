// One line per acceptance criterion; exit status 1 if any fails.

#include <cstdio>

#include <spdlog/spdlog.h>

#include "npspec/acceptance.hpp"

int main() {
  spdlog::set_level(spdlog::level::warn);
  npspec::acceptance::Options opts;
  opts.on_result = [](const npspec::acceptance::Result& r) {
    std::printf("%s\n", npspec::acceptance::format(r).c_str());
    std::fflush(stdout);
  };
  const auto results = npspec::acceptance::run(opts);
  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
