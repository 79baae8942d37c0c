#pragma once

#include "bht/fit.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace bht {

struct IntRange {
   int lo = 0, hi = 0;
   std::vector<int> values() const;
};

// "4..9" or "7"
IntRange parse_range(const std::string &text);

struct ExperimentConfig {
   std::string curve = "monomial:2";
   std::optional<IntRange> j, m; // unset: each command has its own default
   int trials = 6;
   unsigned long long seed = 1;
   std::string out_dir;  // empty: $BHT_OUT_DIR, then "."
   std::string regime;   // "", "small" or "large"
   int threads = 1;
   std::map<std::string, double> tolerances; // overrides of the pass thresholds

   double tol(const std::string &key, double fallback) const;
   std::string output_dir() const;
   void validate() const; // ConfigError
};

// one key=value setting, as read from a file or the command line
void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value);
// flat key=value lines ('#' comments) or a JSON object; ConfigError names the
// line or field at fault
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::string &path);

struct Check {
   std::string name;
   double value = 0.0;
   double limit = 0.0;
   bool upper = true; // pass iff value <= limit (else value >= limit)
   bool pass() const { return upper ? value <= limit : value >= limit; }
};

struct StageReport {
   std::string name;
   double seconds = 0.0;
   std::vector<Check> checks;
   std::vector<DecayFit> fits;
   bool pass() const;
};

struct VerificationReport {
   std::string command;
   std::vector<StageReport> stages;
   std::string csv_path, json_path;
   bool pass() const;
};

const std::vector<std::string> &commands();

// runs `command`, writes <out>/<command>.csv and <out>/<command>.json
VerificationReport run(const std::string &command, const ExperimentConfig &cfg);

} // namespace bht
