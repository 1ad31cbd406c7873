#include "vrcg/report.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vrcg {
namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string normalize_key(std::string key) {
  if (key.rfind("--", 0) == 0) key.erase(0, 2);
  std::replace(key.begin(), key.end(), '-', '_');
  return key;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw std::invalid_argument(key + ": not a number: " + v);
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != v.size() || v.empty()) throw std::invalid_argument(key + ": not an integer: " + v);
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw std::invalid_argument(key + ": not a boolean: " + v);
}

}  // namespace

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "method,trials,trials_ok,relative_error,nnz_ratio,rank,gradients,rank1_svd_equiv,"
         "seconds,reached\n";
  for (const MetricsRow& r : rows) {
    out << r.method << ',' << r.trials << ',' << r.trials_ok << ',' << format_double(r.relative_error)
        << ',' << format_double(r.nnz_ratio) << ',' << format_double(r.rank) << ','
        << format_double(r.gradients) << ',' << format_double(r.rank1_svd_equiv) << ','
        << format_double(r.seconds) << ',' << format_double(r.reached) << '\n';
  }
}

void write_trials_csv(std::ostream& out, const std::vector<TrialRow>& rows) {
  out << "method,trial,ok,relative_error,nnz_ratio,rank,gradients,rank1_svd_equiv,seconds,"
         "reached,error\n";
  for (const TrialRow& r : rows) {
    std::string error = r.error;
    std::replace(error.begin(), error.end(), ',', ';');
    std::replace(error.begin(), error.end(), '\n', ' ');
    out << r.method << ',' << r.trial << ',' << (r.ok ? 1 : 0) << ','
        << format_double(r.relative_error) << ',' << format_double(r.nnz_ratio) << ',' << r.rank
        << ',' << r.gradients << ',' << r.rank1_svd_equiv << ',' << format_double(r.seconds)
        << ',' << (r.reached ? 1 : 0) << ',' << error << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "lambda,trials,trials_ok,relative_error,nnz_ratio,rank\n";
  for (const SweepRow& r : rows) {
    out << format_double(r.lambda) << ',' << r.metrics.trials << ',' << r.metrics.trials_ok << ','
        << format_double(r.metrics.relative_error) << ',' << format_double(r.metrics.nnz_ratio)
        << ',' << format_double(r.metrics.rank) << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = normalize_key(trim(t.substr(0, eq)));
    if (key.empty())
      throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(t.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_key_values(buf.str());
}

void apply_config_values(const std::map<std::string, std::string>& values,
                         ExperimentConfig& config) {
  for (const auto& [raw_key, v] : values) {
    const std::string key = normalize_key(raw_key);
    if (key == "experiment") {
      if (v == "table1") config.experiment = ExperimentKind::kTable1;
      else if (v == "figure") config.experiment = ExperimentKind::kFigure;
      else throw std::invalid_argument("experiment: expected table1 or figure, got " + v);
    } else if (key == "d") {
      config.d = to_integer(key, v);
    } else if (key == "r" || key == "rank") {
      config.r = to_integer(key, v);
    } else if (key == "lambda") {
      config.lambda = to_double(key, v);
    } else if (key == "c" || key == "noise_c") {
      config.noise_c = to_double(key, v);
    } else if (key == "sigma" || key == "noise_sigma") {
      config.noise_sigma = to_double(key, v);
    } else if (key == "trials") {
      config.trials = to_integer(key, v);
    } else if (key == "epsilon_rel") {
      config.epsilon_rel = to_double(key, v);
    } else if (key == "mu_scale") {
      config.mu_scale = to_double(key, v);
    } else if (key == "seed" || key == "seeds") {
      config.seed = static_cast<std::uint64_t>(to_integer(key, v));
    } else if (key == "threads") {
      config.threads = static_cast<unsigned>(to_integer(key, v));
    } else if (key == "timing") {
      config.timing = to_bool(key, v);
    } else if (key == "traces") {
      config.write_traces = to_bool(key, v);
    } else if (key == "baseline_budget_factor") {
      config.baseline_budget_factor = to_double(key, v);
    } else if (key == "out") {
      config.out_dir = v;
    } else if (key == "tau_rule") {
      if (v != "trace-of-signal" && v != "trace_of_signal")
        throw std::invalid_argument("tau_rule: only trace-of-signal is supported");
    } else if (key == "format") {
      if (v != "csv") throw std::invalid_argument("format: only csv is supported");
    } else {
      throw std::invalid_argument("unknown config key: " + raw_key);
    }
  }
}

}  // namespace vrcg
