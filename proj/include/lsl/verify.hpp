#pragma once
#include <cstdint>
#include <string>
#include <vector>

namespace lsl::verify {

struct CheckRow {
  std::string name;
  std::string detail;
  bool pass = false;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckRow> rows;
  bool pass = true;
};

struct SuiteOptions {
  std::uint64_t seed = 1;
  std::uint64_t trials = 0;  // 0: per-suite default
  int threads = 0;           // 0: LSL_THREADS, default 1
};

// Suites: mean, variance, empvar, martingale, condvar, resnet. "all" runs
// every suite in that order. Statistical rows pass at |z| <= 5; analytic
// identity rows pass at absolute tolerance.
std::vector<std::string> suite_names();
bool is_suite(const std::string& name);
std::vector<SuiteResult> run_suites(const std::string& name, const SuiteOptions& opts);

std::string table(const SuiteResult& r);

}  // namespace lsl::verify
