#include "vrcg/trace.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace vrcg {

std::vector<double> RunTrace::epoch_errors() const {
  std::vector<double> out;
  if (!f_star) return out;
  out.reserve(epoch_values.size());
  for (double v : epoch_values) out.push_back(v - *f_star);
  return out;
}

std::optional<TraceRecord> RunTrace::first_within(double gap) const {
  if (!f_star) return std::nullopt;
  for (const TraceRecord& r : records)
    if (r.f - *f_star <= gap) return r;
  return std::nullopt;
}

const char* RunTrace::csv_header() {
  return "epoch,inner_step,f,f_mu,stoch_grads,rank1_svd_equiv,wall_seconds";
}

void RunTrace::write_csv(std::ostream& out) const {
  out << csv_header() << '\n';
  for (const TraceRecord& r : records) {
    out << r.epoch << ',' << r.inner_step << ',' << format_double(r.f) << ','
        << format_double(r.f_mu) << ',' << r.stoch_grads << ',' << r.rank1_svd_equiv << ','
        << format_double(r.wall_seconds) << '\n';
  }
}

void RunTrace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_csv(out);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace vrcg
