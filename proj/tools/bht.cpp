#include "bht/errors.hpp"
#include "bht/harness.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>

int main(int argc, char **argv)
{
   CLI::App app{"bht: verification runs for the bilinear curve toolkit"};
   app.require_subcommand(1);

   std::string config_path, curve, j, m, regime, out;
   std::vector<std::string> tols;
   int trials = 0, threads = 0;
   long long seed = -1;
   app.add_option("--config", config_path, "key=value or JSON config file");
   app.add_option("--curve", curve, "curve spec, e.g. monomial:2, laurent:2=1,-2=1, linear");
   app.add_option("--j", j, "scale j or range lo..hi");
   app.add_option("--m", m, "scale m or range lo..hi");
   app.add_option("--trials", trials, "random trials per scale");
   app.add_option("--seed", seed, "root seed");
   app.add_option("--out", out, "output directory (default $BHT_OUT_DIR, then .)");
   app.add_option("--tol", tols, "threshold override name=value (repeatable)");
   app.add_option("--regime", regime, "small or large")->check(CLI::IsMember({"small", "large"}));
   app.add_option("--threads", threads, "worker threads");
   const std::map<std::string, std::string> about{
      {"verify-curve", "non-flatness certification on the sides the curve lives on"},
      {"multiplier", "diagonal main-term error and off-diagonal decay of the dyadic symbols"},
      {"stationary-phase", "error order of the one-dimensional stationary phase model"},
      {"interaction", "critical interaction decay and critical_condition agreement"},
      {"norm-decay", "operator norm decay in m (--regime small or large)"},
      {"hormander", "two-dimensional non-stationary phase bound"},
      {"vdc", "exponential sum bounds, bilinear bound and the M functional"},
      {"sigma", "trilinear decay against phase-aligned inputs, monomial curves"},
      {"report", "re-evaluate the stored checks of earlier runs in the output directory"}};
   for (const std::string &c : bht::commands()) {
      const auto it = about.find(c);
      // global options may follow the subcommand
      app.add_subcommand(c, it == about.end() ? "" : it->second)->fallthrough();
   }

   try {
      app.parse(argc, argv);
   } catch (const CLI::ParseError &e) {
      const int rc = app.exit(e);
      return rc == 0 ? 0 : 2;
   }

   try {
      bht::ExperimentConfig cfg = config_path.empty() ? bht::ExperimentConfig{} : bht::load_config(config_path);
      if (!curve.empty()) { bht::apply_setting(cfg, "curve", curve); }
      if (!j.empty()) { bht::apply_setting(cfg, "j", j); }
      if (!m.empty()) { bht::apply_setting(cfg, "m", m); }
      if (!regime.empty()) { bht::apply_setting(cfg, "regime", regime); }
      if (!out.empty()) { bht::apply_setting(cfg, "out", out); }
      if (trials > 0) { cfg.trials = trials; }
      if (threads > 0) { cfg.threads = threads; }
      if (seed >= 0) { cfg.seed = static_cast<unsigned long long>(seed); }
      for (const auto &t : tols) { bht::apply_setting(cfg, "tol", t); }
      cfg.validate();

      const std::string command = app.get_subcommands().front()->get_name();
      const bht::VerificationReport rep = bht::run(command, cfg);
      for (const auto &st : rep.stages) {
         for (const auto &c : st.checks) {
            std::cout << (c.pass() ? "PASS " : "FAIL ") << st.name << '.' << c.name << " = " << c.value
                      << (c.upper ? " <= " : " >= ") << c.limit << '\n';
         }
         std::cout << st.name << ": " << st.seconds << " s\n";
      }
      std::cout << "wrote " << rep.csv_path << " and " << rep.json_path << '\n';
      return rep.pass() ? 0 : 1;
   } catch (const bht::ConfigError &e) {
      std::cerr << "config error: " << e.what() << '\n';
      return 2;
   } catch (const std::exception &e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
   }
}
