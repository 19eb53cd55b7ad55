// Runs every acceptance criterion and prints one line per criterion. Exit status 1 if any fails.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "nlsstab/acceptance.hpp"
#include "nlsstab/parallel.hpp"

int main(int argc, char** argv) {
  namespace acc = nlsstab::acceptance;
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  acc::Options opt;
  opt.jobs = nlsstab::default_jobs();
  bool all = true;
  for (const auto& c : acc::criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    const acc::CriterionResult r = acc::run_criterion(c, opt);
    std::printf("%s  criterion %2d  %-45s %7.1f s\n", r.passed ? "PASS" : "FAIL", r.id, r.title.c_str(),
                r.seconds);
    for (const auto& k : r.checks) std::printf("        %s %s\n", k.ok ? "  " : "!!", acc::describe(k).c_str());
    if (!r.error.empty()) std::printf("        error: %s\n", r.error.c_str());
    std::fflush(stdout);
    all = all && r.passed;
  }
  std::printf("%s\n", all ? "all criteria passed" : "some criteria FAILED");
  return all ? 0 : 1;
}
