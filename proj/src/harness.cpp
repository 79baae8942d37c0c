#include "bht/harness.hpp"

#include "bht/bilinear.hpp"
#include "bht/curves.hpp"
#include "bht/errors.hpp"
#include "bht/exp_sums.hpp"
#include "bht/oscillatory.hpp"
#include "bht/seeding.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

namespace bht {

using nlohmann::json;
namespace fs = std::filesystem;

std::vector<int> IntRange::values() const
{
   std::vector<int> v;
   for (int i = lo; i <= hi; ++i) { v.push_back(i); }
   return v;
}

namespace {

std::string trim(const std::string &s)
{
   const auto b = s.find_first_not_of(" \t\r\n");
   if (b == std::string::npos) { return ""; }
   const auto e = s.find_last_not_of(" \t\r\n");
   return s.substr(b, e - b + 1);
}

long long parse_int(const std::string &key, const std::string &v)
{
   try {
      size_t used = 0;
      const long long x = std::stoll(v, &used);
      if (used != v.size()) { throw std::invalid_argument(v); }
      return x;
   } catch (const std::exception &) {
      throw ConfigError("field '" + key + "': expected an integer, got '" + v + "'");
   }
}

double parse_double(const std::string &key, const std::string &v)
{
   try {
      size_t used = 0;
      const double x = std::stod(v, &used);
      if (used != v.size()) { throw std::invalid_argument(v); }
      return x;
   } catch (const std::exception &) {
      throw ConfigError("field '" + key + "': expected a number, got '" + v + "'");
   }
}

} // namespace

IntRange parse_range(const std::string &text)
{
   const std::string t = trim(text);
   const auto dots = t.find("..");
   IntRange r;
   if (dots == std::string::npos) {
      r.lo = r.hi = static_cast<int>(parse_int("range", t));
   } else {
      r.lo = static_cast<int>(parse_int("range", trim(t.substr(0, dots))));
      r.hi = static_cast<int>(parse_int("range", trim(t.substr(dots + 2))));
   }
   if (r.hi < r.lo) { throw ConfigError("range '" + t + "' is empty"); }
   return r;
}

double ExperimentConfig::tol(const std::string &key, double fallback) const
{
   const auto it = tolerances.find(key);
   return it == tolerances.end() ? fallback : it->second;
}

std::string ExperimentConfig::output_dir() const
{
   if (!out_dir.empty()) { return out_dir; }
   if (const char *env = std::getenv("BHT_OUT_DIR"); env != nullptr && *env != '\0') { return env; }
   return ".";
}

void ExperimentConfig::validate() const
{
   if (trials < 1) { throw ConfigError("field 'trials': must be >= 1"); }
   if (threads < 1) { throw ConfigError("field 'threads': must be >= 1"); }
   if (!regime.empty() && regime != "small" && regime != "large") {
      throw ConfigError("field 'regime': expected small or large, got '" + regime + "'");
   }
   try {
      (void)make_curve(curve);
   } catch (const std::exception &e) {
      throw ConfigError("field 'curve': " + std::string(e.what()));
   }
}

void apply_setting(ExperimentConfig &cfg, const std::string &key, const std::string &value)
{
   const std::string v = trim(value);
   if (key == "curve") {
      cfg.curve = v;
   } else if (key == "j" || key == "j_range") {
      cfg.j = parse_range(v);
   } else if (key == "m" || key == "m_range") {
      cfg.m = parse_range(v);
   } else if (key == "trials") {
      cfg.trials = static_cast<int>(parse_int(key, v));
   } else if (key == "seed") {
      cfg.seed = static_cast<unsigned long long>(parse_int(key, v));
   } else if (key == "out" || key == "out_dir") {
      cfg.out_dir = v;
   } else if (key == "regime") {
      cfg.regime = v;
   } else if (key == "threads") {
      cfg.threads = static_cast<int>(parse_int(key, v));
   } else if (key.rfind("tol.", 0) == 0) {
      cfg.tolerances[key.substr(4)] = parse_double(key, v);
   } else if (key == "tol") {
      const auto eq = v.find('=');
      if (eq == std::string::npos) { throw ConfigError("field 'tol': expected name=value, got '" + v + "'"); }
      cfg.tolerances[trim(v.substr(0, eq))] = parse_double(key, trim(v.substr(eq + 1)));
   } else {
      throw ConfigError("unknown field '" + key + "'");
   }
}

namespace {

std::string json_scalar(const json &v)
{
   if (v.is_string()) { return v.get<std::string>(); }
   return v.dump();
}

} // namespace

ExperimentConfig parse_config(const std::string &text)
{
   ExperimentConfig cfg;
   const std::string t = trim(text);
   if (!t.empty() && t.front() == '{') {
      json doc;
      try {
         doc = json::parse(t);
      } catch (const json::parse_error &e) {
         throw ConfigError(std::string("JSON: ") + e.what());
      }
      for (auto it = doc.begin(); it != doc.end(); ++it) {
         if (it.key() == "tolerances") {
            if (!it.value().is_object()) { throw ConfigError("field 'tolerances': expected an object"); }
            for (auto jt = it.value().begin(); jt != it.value().end(); ++jt) {
               apply_setting(cfg, "tol." + jt.key(), json_scalar(jt.value()));
            }
         } else {
            apply_setting(cfg, it.key(), json_scalar(it.value()));
         }
      }
   } else {
      std::istringstream in(text);
      std::string line;
      int n = 0;
      while (std::getline(in, line)) {
         ++n;
         const std::string body = trim(line.substr(0, line.find('#')));
         if (body.empty()) { continue; }
         const auto eq = body.find('=');
         if (eq == std::string::npos) { throw ConfigError("line " + std::to_string(n) + ": expected key=value"); }
         try {
            apply_setting(cfg, trim(body.substr(0, eq)), body.substr(eq + 1));
         } catch (const ConfigError &e) {
            throw ConfigError("line " + std::to_string(n) + ": " + e.what());
         }
      }
   }
   cfg.validate();
   return cfg;
}

ExperimentConfig load_config(const std::string &path)
{
   std::ifstream in(path);
   if (!in) { throw ConfigError("cannot read config file '" + path + "'"); }
   std::stringstream ss;
   ss << in.rdbuf();
   return parse_config(ss.str());
}

bool StageReport::pass() const
{
   return std::all_of(checks.begin(), checks.end(), [](const Check &c) { return c.pass(); });
}

bool VerificationReport::pass() const
{
   return std::all_of(stages.begin(), stages.end(), [](const StageReport &s) { return s.pass(); });
}

const std::vector<std::string> &commands()
{
   static const std::vector<std::string> c{"verify-curve", "multiplier", "stationary-phase", "interaction", "norm-decay",
                                           "hormander",    "vdc",        "sigma",            "report"};
   return c;
}

namespace {

// CSV rows are written with fixed 17-digit precision so reruns are byte-identical
class Table {
public:
   explicit Table(std::vector<std::string> header) : header_(std::move(header)) {}

   template <class... T> void row(const T &...xs)
   {
      std::ostringstream os;
      os.precision(17);
      bool first = true;
      ((os << (first ? "" : ",") << xs, first = false), ...);
      rows_.push_back(os.str());
   }
   void write(const std::string &path) const
   {
      std::ofstream out(path);
      if (!out) { throw ConfigError("cannot write '" + path + "'"); }
      for (size_t i = 0; i < header_.size(); ++i) { out << (i ? "," : "") << header_[i]; }
      out << '\n';
      for (const auto &r : rows_) { out << r << '\n'; }
   }

private:
   std::vector<std::string> header_;
   std::vector<std::string> rows_;
};

class Stopwatch {
public:
   double seconds() const
   {
      return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
   }

private:
   std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// evaluates fn(i) for i < n on `threads` workers; output order is by index
template <class T> std::vector<T> parallel_map(size_t n, int threads, const std::function<T(size_t)> &fn)
{
   std::vector<T> out(n);
   const size_t nt = std::max<size_t>(1, std::min<size_t>(static_cast<size_t>(threads), n));
   auto work = [&](size_t begin) {
      for (size_t i = begin; i < n; i += nt) { out[i] = fn(i); }
   };
   std::vector<std::future<void>> jobs;
   for (size_t t = 1; t < nt; ++t) { jobs.push_back(std::async(std::launch::async, work, t)); }
   work(0);
   for (auto &j : jobs) { j.get(); }
   return out;
}

unsigned long long sub_seed(unsigned long long seed, unsigned long long item) { return item_rng(seed, item)(); }

json fit_json(const DecayFit &f)
{
   json pts = json::array();
   for (auto [x, y] : f.points) { pts.push_back({x, y}); }
   return {{"slope", f.slope},
           {"intercept", f.intercept},
           {"max_residual", f.max_residual},
           {"dropped_nonpositive", f.dropped_nonpositive},
           {"points", pts}};
}

json check_json(const Check &c)
{
   return {{"name", c.name}, {"value", c.value}, {"limit", c.limit}, {"op", c.upper ? "<=" : ">="}, {"pass", c.pass()}};
}

json config_json(const ExperimentConfig &cfg)
{
   json j = {{"curve", cfg.curve}, {"trials", cfg.trials}, {"seed", cfg.seed}, {"regime", cfg.regime},
             {"threads", cfg.threads}, {"tolerances", cfg.tolerances}};
   if (cfg.j) { j["j"] = std::to_string(cfg.j->lo) + ".." + std::to_string(cfg.j->hi); }
   if (cfg.m) { j["m"] = std::to_string(cfg.m->lo) + ".." + std::to_string(cfg.m->hi); }
   return j;
}

json environment_json(const ExperimentConfig &cfg)
{
   const auto now = std::chrono::system_clock::now().time_since_epoch();
   return {{"compiler", __VERSION__},
#ifdef NDEBUG
           {"assertions", false},
#else
           {"assertions", true},
#endif
           {"threads", cfg.threads},
           {"unix_time", std::chrono::duration_cast<std::chrono::seconds>(now).count()}};
}

IntRange range_or(const std::optional<IntRange> &r, IntRange fallback) { return r ? *r : fallback; }

std::string bool_str(bool b) { return b ? "true" : "false"; }

// --- experiments ---

StageReport verify_curve(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   const Curve c = make_curve(cfg.curve);
   StageReport st{"verify-curve", 0, {}, {}};
   for (Side side : {Side::origin, Side::infinity}) {
      if ((side == Side::origin && !c.near_zero) || (side == Side::infinity && !c.near_infinity)) { continue; }
      const NonFlatReport r = check_nonflat(c, side, default_j_range(side));
      std::string reasons;
      for (const auto &s : r.reasons) { reasons += (reasons.empty() ? "" : "; ") + s; }
      t.row(to_string(side), r.c_gamma, r.convtr_inf, r.variation_max, bool_str(r.passes), "\"" + reasons + "\"");
      st.checks.push_back({std::string("nonflat_") + to_string(side), r.passes ? 1.0 : 0.0, 1.0, false});
   }
   st.seconds = sw.seconds();
   return st;
}

StageReport multiplier(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   const Curve c = make_curve(cfg.curve);
   const int j = range_or(cfg.j, {0, 0}).lo;
   const IntRange mr = range_or(cfg.m, {4, 10});
   const int samples = static_cast<int>(cfg.tol("grid_samples", 8));
   StageReport st{"multiplier", 0, {}, {}};
   const SweepReport diag = diagonal_error_sweep(c, j, mr.values(), samples);
   for (const auto &row : diag.rows) { t.row("diagonal", row.m, row.m, row.sup, row.est_error); }
   st.fits.push_back(diag.fit);
   st.checks.push_back({"diagonal_slope", diag.fit.slope, cfg.tol("diagonal_slope", -0.9)});
   // pairs (m, m + 5) whose larger index stays near the diagonal sweep
   const int offset = 5;
   const IntRange off_m{std::max(0, mr.lo - 1), std::max(mr.lo + 2, mr.hi - 2)};
   const SweepReport off = offdiagonal_decay_check(c, j, off_m.values(), offset, samples);
   for (const auto &row : off.rows) { t.row("offdiagonal", row.m, row.m + offset, row.sup, row.est_error); }
   st.fits.push_back(off.fit);
   st.checks.push_back({"offdiagonal_slope", off.fit.slope, cfg.tol("offdiagonal_slope", -0.9)});
   st.seconds = sw.seconds();
   return st;
}

std::vector<double> powers_of_two(double lo, double hi)
{
   std::vector<double> v;
   for (double x = lo; x <= hi; x *= 2) { v.push_back(x); }
   return v;
}

StageReport stationary_phase(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   StageReport st{"stationary-phase", 0, {}, {}};
   const DecayFit f = stationary_phase_error_sweep(powers_of_two(16, 1024));
   for (auto [x, y] : f.points) { t.row(std::exp2(x), y); }
   st.fits.push_back(f);
   st.checks.push_back({"slope", f.slope, cfg.tol("slope", -1.4)});
   st.checks.push_back({"max_residual", f.max_residual, cfg.tol("max_residual", 0.2)});
   st.seconds = sw.seconds();
   return st;
}

StageReport interaction_cmd(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   const Curve c = make_curve(cfg.curve);
   const int j = range_or(cfg.j, {0, 0}).lo;
   const int m = range_or(cfg.m, {10, 10}).hi;
   StageReport st{"interaction", 0, {}, {}};
   const InteractionDecayReport d = interaction_decay(c, j, m, static_cast<int>(cfg.tol("bucket_samples", 40)), cfg.seed);
   for (const auto &r : d.rows) { t.row("bucket", r.r, r.max_abs, r.est_error, r.samples); }
   st.fits.push_back(d.fit);
   st.checks.push_back({"bucket_slope", d.fit.slope, cfg.tol("bucket_slope", -0.45)});
   const AgreementReport a = critical_agreement(c, j, m, static_cast<int>(cfg.tol("agreement_samples", 400)), 32.0, 2.0,
                                                sub_seed(cfg.seed, 1));
   t.row("agreement", "", a.rate, "", a.samples);
   st.checks.push_back({"agreement_rate", a.rate, cfg.tol("agreement_rate", 0.9), false});
   st.seconds = sw.seconds();
   return st;
}

StageReport norm_decay(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   const Curve c = make_curve(cfg.curve);
   const std::vector<int> ms = range_or(cfg.m, {4, 9}).values();
   const bool small = cfg.regime != "large";
   const int j_large = range_or(cfg.j, {0, 0}).lo;
   StageReport st{small ? "norm-decay-small" : "norm-decay-large", 0, {}, {}};
   struct Item {
      int j = 0;
      NormEstimate est;
   };
   const std::vector<Item> items = parallel_map<Item>(ms.size(), cfg.threads, [&](size_t i) {
      const int m = ms[i];
      const unsigned long long s = sub_seed(cfg.seed, static_cast<unsigned long long>(m));
      if (small) {
         const int j = cfg.j ? cfg.j->lo : small_regime_j(c, m);
         return Item{j, norm_D_estimate(c, j, m, cfg.trials, s)};
      }
      if (regime_of(c, j_large, m) != Regime::large) { throw ConfigError("j is not in the large regime for every m"); }
      return Item{j_large, norm_B_estimate(c, j_large, m, cfg.trials, NormKind::L1, s)};
   });
   std::vector<std::pair<double, double>> pts;
   bool cs = true;
   for (size_t i = 0; i < ms.size(); ++i) {
      const NormEstimate &e = items[i].est;
      for (size_t k = 0; k < e.trials.size(); ++k) {
         const double l1 = k < e.l1.size() ? e.l1[k] : NAN, l2 = k < e.l2.size() ? e.l2[k] : NAN;
         t.row(ms[i], items[i].j, k, e.trials[k], l1, l2);
      }
      pts.emplace_back(ms[i], e.value);
      cs = cs && e.cauchy_schwarz;
   }
   // the two smallest m carry transient constants
   const DecayFit f = fit_decay(pts, pts.size() >= 6 ? 2 : 0);
   st.fits.push_back(f);
   if (small) {
      st.checks.push_back({"slope", f.slope, cfg.tol("slope", -0.25)});
   } else {
      st.checks.push_back({"slope", f.slope, cfg.tol("slope", -1.0 / 16.0)});
      st.checks.push_back({"cauchy_schwarz", cs ? 1.0 : 0.0, 1.0, false});
   }
   st.seconds = sw.seconds();
   return st;
}

StageReport hormander(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   StageReport st{"hormander", 0, {}, {}};
   std::vector<HormanderReport> rows;
   const DecayFit f = hormander_sweep(powers_of_two(4, 4096), &rows);
   for (const auto &r : rows) { t.row(r.lambda, r.ratio, r.bound, r.C, r.est_error); }
   st.fits.push_back(f);
   st.checks.push_back({"slope", f.slope, cfg.tol("slope", -0.45)});
   st.seconds = sw.seconds();
   return st;
}

std::vector<cplx> random_sequence(int m, unsigned long long seed)
{
   std::mt19937_64 rng = item_rng(seed, 0);
   std::normal_distribution<double> n;
   std::vector<cplx> v(static_cast<size_t>((1L << m) + 1));
   for (auto &z : v) { z = {n(rng), n(rng)}; }
   return v;
}

StageReport vdc(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   StageReport st{"vdc", 0, {}, {}};
   const int samples = static_cast<int>(cfg.tol("vdc_samples", 500));
   const std::vector<int> ms = cfg.m ? cfg.m->values() : std::vector<int>{8, 10, 12};
   for (int m : ms) {
      const SBoundReport r = s_bound_check(m, samples, sub_seed(cfg.seed, static_cast<unsigned long long>(m)), cfg.threads);
      for (const auto &row : r.rows) {
         t.row("S", row.spec.m, row.spec.p, row.spec.l, row.spec.alpha, row.spec.beta, row.abs_S, row.bound, row.ratio);
      }
      st.checks.push_back({"S_ratio_m" + std::to_string(m), r.max_ratio, cfg.tol("S_ratio", 10.0)});
   }
   const int mb = 10;
   const int trials = static_cast<int>(cfg.tol("bilinear_trials", 50));
   struct Trial {
      long alpha = 0, beta = 0;
      BilinearVdc r;
   };
   const std::vector<Trial> bil = parallel_map<Trial>(static_cast<size_t>(trials), cfg.threads, [&](size_t i) {
      std::mt19937_64 rng = item_rng(sub_seed(cfg.seed, 100), i);
      std::uniform_int_distribution<long> pick(1, 1L << (mb - 1));
      const long a = pick(rng), b = pick(rng);
      const auto x = random_sequence(mb, rng()), y = random_sequence(mb, rng());
      return Trial{a, b, bilinear_vdc(x, y, a, b, mb)};
   });
   double cmax = 0;
   for (const auto &b : bil) {
      t.row("bilinear", mb, "", "", b.alpha, b.beta, b.r.value, b.r.bound, b.r.constant);
      cmax = std::max(cmax, b.r.constant);
   }
   st.checks.push_back({"bilinear_constant", cmax, cfg.tol("bilinear_constant", 20.0)});
   const int mm = 8;
   const std::vector<cplx> ones(static_cast<size_t>((1L << mm) + 1), cplx(1.0));
   const MReport M = m_functional(ones, ones, mm, default_alpha0(mm));
   t.row("M", mm, "", "", M.alpha0, "", M.value, M.envelope, M.constant);
   st.checks.push_back({"M_constant", M.constant, cfg.tol("M_constant", 50.0)});
   st.seconds = sw.seconds();
   return st;
}

int monomial_degree(const std::string &spec)
{
   const Curve c = make_curve(spec);
   if (std::isfinite(c.power_origin) && c.power_origin == std::round(c.power_origin) && c.power_origin >= 2 &&
       spec.rfind("monomial", 0) == 0) {
      return static_cast<int>(c.power_origin);
   }
   return 2;
}

StageReport sigma(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   StageReport st{"sigma", 0, {}, {}};
   const int d = monomial_degree(cfg.curve);
   const std::vector<int> ms = range_or(cfg.m, {4, 9}).values();
   const std::vector<Lemma2Report> reps = parallel_map<Lemma2Report>(ms.size(), cfg.threads, [&](size_t i) {
      const int m = ms[i];
      return lemma2_check(d, m + 2, m, std::max(4, cfg.trials), sub_seed(cfg.seed, static_cast<unsigned long long>(m)));
   });
   std::vector<std::pair<double, double>> pts;
   for (size_t i = 0; i < ms.size(); ++i) {
      const auto &r = reps[i];
      t.row(ms[i], r.value, r.random_g, r.near, r.far, r.a_best, r.b_best);
      pts.emplace_back(ms[i], r.value);
   }
   const DecayFit f = fit_decay(pts, pts.size() >= 6 ? 2 : 0);
   st.fits.push_back(f);
   st.checks.push_back({"aligned_slope", f.slope, cfg.tol("aligned_slope", -0.2)});
   st.seconds = sw.seconds();
   return st;
}

void write_json(const VerificationReport &rep, const ExperimentConfig &cfg, const std::string &path)
{
   json stages = json::array();
   for (const auto &s : rep.stages) {
      json checks = json::array(), fits = json::array();
      for (const auto &c : s.checks) { checks.push_back(check_json(c)); }
      for (const auto &f : s.fits) { fits.push_back(fit_json(f)); }
      stages.push_back({{"name", s.name}, {"seconds", s.seconds}, {"pass", s.pass()}, {"checks", checks}, {"fits", fits}});
   }
   const json doc = {{"schema", 1},     {"command", rep.command},     {"pass", rep.pass()},
                     {"config", config_json(cfg)}, {"stages", stages}, {"environment", environment_json(cfg)}};
   std::ofstream out(path);
   if (!out) { throw ConfigError("cannot write '" + path + "'"); }
   out << doc.dump(2) << '\n';
}

// reads every <command>.json in the output directory and re-evaluates the stored checks
StageReport report(const ExperimentConfig &cfg, Table &t)
{
   Stopwatch sw;
   StageReport st{"report", 0, {}, {}};
   std::vector<fs::path> files;
   for (const auto &e : fs::directory_iterator(cfg.output_dir())) {
      if (e.path().extension() == ".json" && e.path().stem() != "report") { files.push_back(e.path()); }
   }
   std::sort(files.begin(), files.end());
   for (const auto &p : files) {
      std::ifstream in(p);
      json doc;
      try {
         doc = json::parse(in);
      } catch (const json::parse_error &) {
         continue;
      }
      if (!doc.contains("schema") || doc["schema"] != 1) { continue; }
      for (const auto &s : doc["stages"]) {
         for (const auto &c : s["checks"]) {
            Check k{s["name"].get<std::string>() + "." + c["name"].get<std::string>(), c["value"].get<double>(),
                    c["limit"].get<double>(), c["op"] == "<="};
            t.row(doc["command"].get<std::string>(), k.name, k.value, k.limit, bool_str(k.pass()));
            st.checks.push_back(k);
         }
      }
   }
   if (files.empty()) { throw ConfigError("no reports in '" + cfg.output_dir() + "'"); }
   st.seconds = sw.seconds();
   return st;
}

std::vector<std::string> header_of(const std::string &command, const ExperimentConfig &cfg)
{
   if (command == "verify-curve") { return {"side", "c_gamma", "convtr", "variation", "passes", "reasons"}; }
   if (command == "multiplier") { return {"series", "m", "n", "sup", "est_error"}; }
   if (command == "stationary-phase") { return {"lambda", "error"}; }
   if (command == "interaction") { return {"series", "r", "value", "est_error", "samples"}; }
   if (command == "norm-decay") {
      return {"m", "j", "trial", cfg.regime == "large" ? "l1_ratio" : "l2_ratio", "l1", "l2"};
   }
   if (command == "hormander") { return {"lambda", "ratio", "bound", "C", "est_error"}; }
   if (command == "vdc") { return {"series", "m", "p", "l", "alpha", "beta", "abs_S", "bound", "ratio"}; }
   if (command == "sigma") { return {"m", "value", "random_g", "near", "far", "a", "b"}; }
   return {"command", "check", "value", "limit", "pass"};
}

} // namespace

VerificationReport run(const std::string &command, const ExperimentConfig &cfg)
{
   cfg.validate();
   using Fn = std::function<StageReport(const ExperimentConfig &, Table &)>;
   static const std::map<std::string, Fn> table{
      {"verify-curve", verify_curve}, {"multiplier", multiplier}, {"stationary-phase", stationary_phase},
      {"interaction", interaction_cmd}, {"norm-decay", norm_decay}, {"hormander", hormander},
      {"vdc", vdc},                   {"sigma", sigma},           {"report", report}};
   const auto it = table.find(command);
   if (it == table.end()) { throw ConfigError("unknown command '" + command + "'"); }
   const fs::path dir = cfg.output_dir();
   fs::create_directories(dir);
   Table t(header_of(command, cfg));
   VerificationReport rep;
   rep.command = command;
   rep.stages.push_back(it->second(cfg, t));
   rep.csv_path = (dir / (command + ".csv")).string();
   rep.json_path = (dir / (command + ".json")).string();
   t.write(rep.csv_path);
   write_json(rep, cfg, rep.json_path);
   return rep;
}

} // namespace bht
