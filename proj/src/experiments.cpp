#include "uar/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "uar/parallel.hpp"
#include "uar/statistics.hpp"

namespace uar {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    auto t = trim(p);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

std::size_t parse_count(const std::string& text, const std::string& key) {
  const std::string t = trim(text);
  std::size_t pos = 0;
  long long v = 0;
  try {
    v = std::stoll(t, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("key '" + key + "': expected an integer, got '" + t + "'");
  }
  if (pos != t.size() || v < 0) throw std::invalid_argument("key '" + key + "': expected a non-negative integer, got '" + t + "'");
  return static_cast<std::size_t>(v);
}

// Reals with an optional pi factor: 0.5, pi, pi/4, 3pi/4, 3*pi/4.
double parse_real(const std::string& text, const std::string& key) {
  std::string t = trim(text);
  try {
    const auto at = t.find("pi");
    if (at == std::string::npos) {
      std::size_t pos = 0;
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw std::invalid_argument(t);
      return v;
    }
    std::string num = trim(t.substr(0, at));
    if (!num.empty() && num.back() == '*') num.pop_back();
    const double factor = num.empty() ? 1.0 : std::stod(num);
    std::string rest = trim(t.substr(at + 2));
    double denom = 1.0;
    if (!rest.empty()) {
      if (rest.front() != '/') throw std::invalid_argument(t);
      denom = std::stod(rest.substr(1));
    }
    return factor * kPi / denom;
  } catch (const std::exception&) {
    throw std::invalid_argument("key '" + key + "': cannot read '" + t + "' as a number");
  }
}

template <class T, class F>
std::vector<T> parse_list(const std::string& text, const std::string& key, F&& one) {
  std::vector<T> out;
  for (const auto& item : split_list(text)) out.push_back(one(item, key));
  if (out.empty()) throw std::invalid_argument("key '" + key + "': empty list");
  return out;
}

std::string format_real(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

std::uint64_t label_tag(const std::string& label) {
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
  for (unsigned char ch : label) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

struct RootBlock {
  LimitCase kind;
  std::size_t multiplicity;
  double theta;
};

std::vector<RootBlock> limit_blocks(const ExperimentConfig::Limit& limit) {
  const std::string k = trim(limit.kind);
  if (k == "i") return {{LimitCase::Complex, 1, limit.theta}};
  if (k == "ii") return {{LimitCase::PlusOne, 2, 0.0}};
  if (k == "iii") return {{LimitCase::MinusOne, 2, 0.0}};
  if (k == "iv") return {{LimitCase::PlusOne, 1, 0.0}, {LimitCase::MinusOne, 1, 0.0}};
  std::vector<std::string> parts;
  boost::algorithm::split(parts, k, boost::is_any_of(":"));
  if (parts[0] == "plus" && parts.size() == 2) return {{LimitCase::PlusOne, parse_count(parts[1], "case"), 0.0}};
  if (parts[0] == "minus" && parts.size() == 2) return {{LimitCase::MinusOne, parse_count(parts[1], "case"), 0.0}};
  if (parts[0] == "complex" && (parts.size() == 2 || parts.size() == 3)) {
    const double theta = parse_real(parts[1], "case");
    const std::size_t d = parts.size() == 3 ? parse_count(parts[2], "case") : 1;
    return {{LimitCase::Complex, d, theta}};
  }
  throw std::invalid_argument("unknown limit case '" + k + "' (use i, ii, iii, iv, plus:r, minus:s, complex:theta:d)");
}

}  // namespace

Scale parse_scale(const std::string& text) {
  if (text == "desk") return Scale::Desk;
  if (text == "paper") return Scale::Paper;
  throw std::invalid_argument("scale must be 'desk' or 'paper', got '" + text + "'");
}

ARModel ExperimentConfig::model() const {
  if (!phi.empty()) {
    ARModel m;
    m.phi = phi;
    return m;
  }
  return expand_polynomial(roots);
}

void ExperimentConfig::validate() const {
  if (phi.empty()) roots.validate();
  const std::size_t p = model().order();
  if (replicates < 1) throw std::invalid_argument("replicates must be at least 1");
  if (coefficient < 1 || coefficient > p) throw std::invalid_argument("coefficient must lie in 1..p");
  for (std::size_t n : n_list)
    if (n < 2 * p + 2) throw std::invalid_argument("every n must be at least 2p + 2");
  for (std::size_t n : boot.n_list)
    if (n < 2 * p + 2) throw std::invalid_argument("every bootstrap n must be at least 2p + 2");
  if (!(scale > 0.0)) throw std::invalid_argument("innovation scale must be positive");
  for (double a : alpha_list)
    if (!(a > 0.0 && a <= 2.0)) throw std::invalid_argument("alpha must lie in (0, 2]");
  for (double a : boot.alpha_list)
    if (!(a > 0.0 && a <= 2.0)) throw std::invalid_argument("bootstrap alpha must lie in (0, 2]");
  if (boot.replicates < 100) throw std::invalid_argument("bootstrap B must be at least 100");
  if (!(boot.level > 0.0 && boot.level < 1.0)) throw std::invalid_argument("bootstrap level must lie in (0, 1)");
  for (const auto& rule : boot.m_rules) parse_m_rule(rule);
  if (paths.n < p + 1) throw std::invalid_argument("paths n must exceed the model order");
  if (single.n < 2 * p + 2) throw std::invalid_argument("single n must be at least 2p + 2");
  if (limit.mesh < 2) throw std::invalid_argument("limit mesh must be at least 2");
  if (limit.truncation < 1) throw std::invalid_argument("limit truncation must be at least 1");
}

ExperimentConfig parse_config(const std::string& text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  static const std::map<std::string, std::set<std::string>> allowed = {
      {"model", {"r", "s", "pairs", "phi"}},
      {"innovations", {"family", "scale"}},
      {"experiment", {"n", "alpha", "replicates", "estimators", "coefficient", "seed", "jobs", "out_dir"}},
      {"paths", {"count", "n", "alpha"}},
      {"limit", {"case", "alpha", "theta", "draws", "mesh", "truncation", "loss"}},
      {"bootstrap", {"n", "alpha", "m_rules", "B", "outer", "level", "loss"}},
      {"single", {"n", "alpha", "loss", "input", "order"}},
  };
  ExperimentConfig c;
  bool model_seen = false;  // a [model] section replaces the default roots
  for (const auto& [section, body] : tree) {
    const auto it = allowed.find(section);
    if (it == allowed.end() || body.empty())
      throw std::invalid_argument("config: unknown section or top-level key '" + section + "'");
    for (const auto& [key, node] : body) {
      if (!it->second.count(key)) throw std::invalid_argument("config: unknown key '" + section + "." + key + "'");
      const std::string v = trim(node.data());
      const std::string name = section + "." + key;
      if (section == "model") {
        if (!model_seen) {
          c.roots = RootSpec{};
          model_seen = true;
        }
        if (key == "r") c.roots.r = parse_count(v, name);
        if (key == "s") c.roots.s = parse_count(v, name);
        if (key == "pairs") {
          c.roots.pairs.clear();
          for (const auto& item : split_list(v)) {
            const auto colon = item.rfind(':');
            ComplexPair pair;
            pair.theta = parse_real(item.substr(0, colon), name);
            pair.multiplicity = colon == std::string::npos ? 1 : parse_count(item.substr(colon + 1), name);
            c.roots.pairs.push_back(pair);
          }
        }
        if (key == "phi") c.phi = parse_list<double>(v, name, parse_real);
      } else if (section == "innovations") {
        if (key == "family") c.family = parse_family(v);
        if (key == "scale") c.scale = parse_real(v, name);
      } else if (section == "experiment") {
        if (key == "n") c.n_list = parse_list<std::size_t>(v, name, parse_count);
        if (key == "alpha") c.alpha_list = parse_list<double>(v, name, parse_real);
        if (key == "replicates") c.replicates = parse_count(v, name);
        if (key == "estimators") c.estimators = split_list(v);
        if (key == "coefficient") c.coefficient = parse_count(v, name);
        if (key == "seed") c.seed = parse_count(v, name);
        if (key == "jobs") c.jobs = parse_count(v, name);
        if (key == "out_dir") c.out_dir = v;
      } else if (section == "paths") {
        if (key == "count") c.paths.count = parse_count(v, name);
        if (key == "n") c.paths.n = parse_count(v, name);
        if (key == "alpha") c.paths.alpha = parse_real(v, name);
      } else if (section == "limit") {
        if (key == "case") c.limit.kind = v;
        if (key == "alpha") c.limit.alpha = parse_real(v, name);
        if (key == "theta") c.limit.theta = parse_real(v, name);
        if (key == "draws") c.limit.draws = parse_count(v, name);
        if (key == "mesh") c.limit.mesh = parse_count(v, name);
        if (key == "truncation") c.limit.truncation = parse_count(v, name);
        if (key == "loss") c.limit.loss = v;
      } else if (section == "bootstrap") {
        if (key == "n") c.boot.n_list = parse_list<std::size_t>(v, name, parse_count);
        if (key == "alpha") c.boot.alpha_list = parse_list<double>(v, name, parse_real);
        if (key == "m_rules") c.boot.m_rules = split_list(v);
        if (key == "B") c.boot.replicates = parse_count(v, name);
        if (key == "outer") c.boot.outer = parse_count(v, name);
        if (key == "level") c.boot.level = parse_real(v, name);
        if (key == "loss") c.boot.loss = v;
      } else if (section == "single") {
        if (key == "n") c.single.n = parse_count(v, name);
        if (key == "alpha") c.single.alpha = parse_real(v, name);
        if (key == "loss") c.single.loss = v;
        if (key == "input") c.single.input = v;
        if (key == "order") c.single.order = parse_count(v, name);
      }
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void apply_scale(ExperimentConfig& config, Scale scale) {
  if (scale == Scale::Desk) {
    config.replicates = 2000;
    config.boot.replicates = 500;
    config.boot.outer = 500;
  } else {
    config.replicates = 10000;
    config.boot.replicates = 3000;
    config.boot.outer = 10000;
  }
}

RandomStream cell_stream(std::uint64_t seed, std::size_t n, double alpha, const std::string& label) {
  return RandomStream(seed).derive({static_cast<std::uint64_t>(n), tag_of(alpha), label_tag(label)});
}

InnovationSpec innovation_spec(const ExperimentConfig& config, double alpha) {
  InnovationSpec spec = config.family == InnovationFamily::ExactSaS ? InnovationSpec::exact(alpha, config.scale)
                                                                     : InnovationSpec::pareto(alpha, config.scale);
  return spec;
}

TimeSeries simulate_sample(const ARModel& model, const InnovationSpec& spec, std::size_t n, RandomStream& rng) {
  const std::size_t p = model.order();
  if (n < p + 1) throw std::invalid_argument("sample size must exceed the model order");
  return simulate_from_rest(model, sample_innovations(spec, n - p, rng));
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw std::runtime_error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---- paths -------------------------------------------------------------------

std::vector<std::filesystem::path> cmd_paths(const ExperimentConfig& config) {
  config.validate();
  const ARModel model = config.model();
  if (config.paths.n == 0) throw std::invalid_argument("paths: n must be positive");
  if (config.paths.n <= model.order()) throw std::invalid_argument("paths: n must exceed the model order");
  const InnovationSpec spec = innovation_spec(config, config.paths.alpha);
  const RandomStream cell = cell_stream(config.seed, config.paths.n, config.paths.alpha, "paths");
  std::vector<std::filesystem::path> files;
  for (std::size_t k = 0; k < config.paths.count; ++k) {
    RandomStream rng = cell.derive(k);
    TimeSeries series = simulate_sample(model, spec, config.paths.n, rng);
    series.innovations.reset();
    const auto file = config.out_dir / ("path_" + std::to_string(k + 1) + ".csv");
    write_text_file(file, series.to_csv());
    files.push_back(file);
  }
  return files;
}

// ---- mc-table -----------------------------------------------------------------

std::optional<LossFunction> estimator_loss(const std::string& estimator) {
  const std::string e = trim(estimator);
  if (e == "LS" || e == "ls") return std::nullopt;
  if (e == "M" || e == "m") return huber_loss(5.0);
  if (e.rfind("M:", 0) == 0 || e.rfind("m:", 0) == 0) return huber_loss(parse_real(e.substr(2), "estimator"));
  return parse_loss(e);
}

EstimationResult fit_with(const std::string& estimator, const TimeSeries& series, std::size_t p) {
  const auto loss = estimator_loss(estimator);
  return loss ? m_estimate(series, p, *loss) : ls_estimate(series, p);
}

std::string SummaryTable::to_csv() const {
  std::ostringstream os;
  os << "n,alpha,estimator,median,ipr90,replicates,failures\n";
  for (const auto& r : rows) {
    os << r.n << ',' << format_real(r.alpha) << ',' << r.estimator << ',' << format_real(r.median) << ','
       << format_real(r.ipr90) << ',' << r.replicates << ',' << r.failures << '\n';
  }
  return os.str();
}

std::string SummaryTable::failures_csv() const {
  std::ostringstream os;
  os << "n,alpha,estimator,replicate,diagnostic\n";
  for (const auto& f : failures) {
    std::string diag = f.diagnostic;
    std::replace(diag.begin(), diag.end(), ',', ';');
    os << f.n << ',' << format_real(f.alpha) << ',' << f.estimator << ',' << f.replicate << ',' << diag << '\n';
  }
  return os.str();
}

SummaryTable mc_table(const ExperimentConfig& config) {
  config.validate();
  const ARModel model = config.model();
  const std::size_t p = model.order();
  const std::size_t k = config.coefficient - 1;
  const double truth = model.phi[k];
  std::vector<std::optional<LossFunction>> losses;
  for (const auto& e : config.estimators) losses.push_back(estimator_loss(e));

  struct Cell {
    std::size_t n;
    double alpha;
    std::string estimator;
    const std::optional<LossFunction>* loss;
  };
  std::vector<Cell> cells;
  for (std::size_t n : config.n_list)
    for (double a : config.alpha_list)
      for (std::size_t e = 0; e < losses.size(); ++e) cells.push_back({n, a, config.estimators[e], &losses[e]});

  const std::size_t reps = config.replicates;
  std::vector<double> error(cells.size() * reps, 0.0);
  std::vector<std::string> diagnostic(cells.size() * reps);
  std::vector<char> ok(cells.size() * reps, 0);

  parallel_for(cells.size() * reps, config.jobs, [&](std::size_t job) {
    const Cell& cell = cells[job / reps];
    const std::size_t r = job % reps;
    RandomStream rng = cell_stream(config.seed, cell.n, cell.alpha, cell.estimator).derive(r);
    const TimeSeries series = simulate_sample(model, innovation_spec(config, cell.alpha), cell.n, rng);
    try {
      const EstimationResult fit = *cell.loss ? m_estimate(series, p, **cell.loss) : ls_estimate(series, p);
      if (!fit.converged) {
        diagnostic[job] = fit.diagnostic.empty() ? "not converged" : fit.diagnostic;
        return;
      }
      error[job] = std::abs(fit.phi_hat[k] - truth);
      ok[job] = 1;
    } catch (const EstimationError& e) {
      diagnostic[job] = e.what();
    }
  });

  SummaryTable table;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> kept;
    for (std::size_t r = 0; r < reps; ++r) {
      const std::size_t job = c * reps + r;
      if (ok[job]) {
        kept.push_back(error[job]);
      } else {
        table.failures.push_back({cells[c].n, cells[c].alpha, cells[c].estimator, r, diagnostic[job]});
      }
    }
    SummaryRow row;
    row.n = cells[c].n;
    row.alpha = cells[c].alpha;
    row.estimator = cells[c].estimator;
    row.replicates = kept.size();
    row.failures = reps - kept.size();
    if (!kept.empty()) {
      row.median = stats::median(kept);
      row.ipr90 = stats::ipr90(kept);
    } else {
      row.median = row.ipr90 = std::nan("");
    }
    table.rows.push_back(row);
    table.errors.push_back(std::move(kept));
  }
  return table;
}

std::filesystem::path cmd_mc_table(const ExperimentConfig& config) {
  const SummaryTable table = mc_table(config);
  const auto file = config.out_dir / "mc_table.csv";
  write_text_file(file, table.to_csv());
  write_text_file(config.out_dir / "mc_failures.csv", table.failures_csv());
  return file;
}

// ---- limit-sample -------------------------------------------------------------

std::vector<LimitDraw> limit_draws(const ExperimentConfig& config) {
  config.validate();
  const auto& lim = config.limit;
  const auto blocks = limit_blocks(lim);
  if (!(lim.alpha > 0.0 && lim.alpha <= 2.0)) throw std::invalid_argument("limit: alpha must lie in (0, 2]");
  if (lim.mesh < 2) throw std::invalid_argument("limit: mesh must be at least 2");
  for (const auto& b : blocks) {
    if (b.multiplicity == 0) throw std::invalid_argument("limit: multiplicity must be at least 1");
    if (b.kind == LimitCase::Complex && !(b.theta > 0.0 && b.theta < kPi))
      throw std::invalid_argument("limit: theta must lie in (0, pi)");
  }
  const LossFunction loss = parse_loss(lim.loss);
  const LossMoments moments = loss_moments(loss, innovation_spec(config, lim.alpha));
  LimitOptions options;
  options.mesh = lim.mesh;
  options.truncation = lim.truncation;
  const RandomStream cell = cell_stream(config.seed, 0, lim.alpha, "limit:" + lim.kind);

  std::vector<LimitDraw> draws(lim.draws);
  parallel_for(lim.draws, config.jobs, [&](std::size_t d) {
    const RandomStream stream = cell.derive(d);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const RandomStream bs = stream.derive(b);
      const auto& blk = blocks[b];
      if (blk.kind == LimitCase::Complex) {
        draws[d].blocks.push_back(limit_sample_complex(blk.theta, blk.multiplicity, lim.alpha, moments, bs, options));
      } else {
        draws[d].blocks.push_back(limit_sample_real_root(
            blk.multiplicity, lim.alpha, moments, bs,
            blk.kind == LimitCase::PlusOne ? RealRoot::Plus : RealRoot::Minus, options));
      }
    }
  });
  return draws;
}

std::string limit_draws_csv(const std::vector<LimitDraw>& draws) {
  std::string out = "draw,block,component,value\n";
  for (std::size_t d = 0; d < draws.size(); ++d)
    for (const auto& b : draws[d].blocks) out += to_csv_rows(b, d + 1);
  return out;
}

std::filesystem::path cmd_limit_sample(const ExperimentConfig& config) {
  const auto file = config.out_dir / "limit_draws.csv";
  write_text_file(file, limit_draws_csv(limit_draws(config)));
  return file;
}

// ---- boot-coverage ------------------------------------------------------------

std::vector<CoverageRow> boot_coverage(const ExperimentConfig& config) {
  config.validate();
  const ARModel model = config.model();
  std::vector<CoverageRow> rows;
  for (std::size_t n : config.boot.n_list) {
    for (double a : config.boot.alpha_list) {
      for (const auto& rule_text : config.boot.m_rules) {
        BootstrapConfig bc;
        bc.m_rule = parse_m_rule(rule_text);
        bc.replicates = config.boot.replicates;
        bc.level = config.boot.level;
        bc.loss = parse_loss(config.boot.loss);
        bc.jobs = config.jobs;
        // same outer samples for every m-rule
        const RandomStream cell = cell_stream(config.seed, n, a, "boot");
        CoverageRow row;
        row.n = n;
        row.alpha = a;
        row.m_rule = bc.m_rule.describe();
        row.result = coverage_experiment(model, innovation_spec(config, a), n, bc, config.boot.outer, cell,
                                         config.coefficient - 1);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string coverage_csv(const std::vector<CoverageRow>& rows) {
  std::ostringstream os;
  os << "n,alpha,m_rule,m,coverage_percent,outer,kept,failed_fits,dropped_bootstrap,flagged,mean_width\n";
  for (const auto& r : rows) {
    const auto& c = r.result;
    os << r.n << ',' << format_real(r.alpha) << ',' << r.m_rule << ',' << c.m_used << ','
       << format_real(100.0 * c.coverage) << ',' << c.outer << ',' << c.kept << ',' << c.failed_fits << ','
       << c.dropped_inner << ',' << c.flagged << ',' << format_real(c.mean_width) << '\n';
  }
  return os.str();
}

std::filesystem::path cmd_boot_coverage(const ExperimentConfig& config) {
  const auto file = config.out_dir / "boot_coverage.csv";
  write_text_file(file, coverage_csv(boot_coverage(config)));
  return file;
}

// ---- estimate / simulate ------------------------------------------------------

std::filesystem::path cmd_estimate(const ExperimentConfig& config, EstimationResult* result) {
  config.validate();
  TimeSeries series;
  if (config.single.input) {
    std::ifstream in(*config.single.input);
    if (!in) throw std::runtime_error("cannot open input series " + config.single.input->string());
    std::ostringstream buf;
    buf << in.rdbuf();
    series = TimeSeries::from_csv(buf.str());
  } else {
    RandomStream rng = cell_stream(config.seed, config.single.n, config.single.alpha, "single");
    series = simulate_sample(config.model(), innovation_spec(config, config.single.alpha), config.single.n, rng);
  }
  const std::size_t p = config.single.order > 0 ? config.single.order : config.model().order();
  const EstimationResult fit = fit_with(config.single.loss, series, p);
  const auto file = config.out_dir / "estimate.csv";
  write_text_file(file, fit.to_csv());
  write_text_file(config.out_dir / "estimate.txt", fit.to_text());
  if (result) *result = fit;
  return file;
}

std::filesystem::path cmd_simulate(const ExperimentConfig& config) {
  config.validate();
  RandomStream rng = cell_stream(config.seed, config.single.n, config.single.alpha, "single");
  const TimeSeries series =
      simulate_sample(config.model(), innovation_spec(config, config.single.alpha), config.single.n, rng);
  const auto file = config.out_dir / "series.csv";
  write_text_file(file, series.to_csv());
  return file;
}

}  // namespace uar
