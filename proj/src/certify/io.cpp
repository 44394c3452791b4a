#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "ergobound/certify.hpp"
#include "json.hpp"

namespace ergobound {

namespace {

std::string Fmt(const char* spec, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string RegionGridToText(const RegionGrid& grid) {
  std::ostringstream out;
  out << "ergobound-grid 1\n";
  out << "dim " << grid.box.size() << "\n";
  out << "box";
  for (const auto& [lo, hi] : grid.box) out << " " << Fmt("%.17g", lo) << " " << Fmt("%.17g", hi);
  out << "\nresolution";
  for (int r : grid.resolution) out << " " << r;
  out << "\nthreshold " << Fmt("%.17g", grid.threshold) << "\n";
  out << "bound " << Fmt("%.17g", grid.bound) << "\n";
  out << "certificate " << (grid.certificate_id.empty() ? "-" : grid.certificate_id) << "\n";
  out << "values " << grid.values.size() << "\n";
  for (double v : grid.values) out << Fmt("%.9g", v) << "\n";
  return out.str();
}

RegionGrid RegionGridFromText(std::string_view text) {
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& what) {
    return std::runtime_error("RegionGridFromText: " + what);
  };
  std::string key;
  int version = 0;
  if (!(in >> key >> version) || key != "ergobound-grid" || version != 1) {
    throw fail("missing header");
  }
  std::size_t dim = 0;
  if (!(in >> key >> dim) || key != "dim" || dim == 0) throw fail("bad dim line");
  RegionGrid grid;
  if (!(in >> key) || key != "box") throw fail("bad box line");
  grid.box.resize(dim);
  for (auto& [lo, hi] : grid.box) {
    if (!(in >> lo >> hi)) throw fail("bad box line");
  }
  if (!(in >> key) || key != "resolution") throw fail("bad resolution line");
  grid.resolution.resize(dim);
  for (int& r : grid.resolution) {
    if (!(in >> r) || r < 2) throw fail("bad resolution line");
  }
  if (!(in >> key >> grid.threshold) || key != "threshold") throw fail("bad threshold line");
  if (!(in >> key >> grid.bound) || key != "bound") throw fail("bad bound line");
  if (!(in >> key >> grid.certificate_id) || key != "certificate") throw fail("bad certificate line");
  if (grid.certificate_id == "-") grid.certificate_id.clear();
  std::size_t count = 0;
  if (!(in >> key >> count) || key != "values") throw fail("bad values line");
  if (count != grid.num_nodes()) throw fail("value count does not match resolution");
  grid.values.resize(count);
  for (double& v : grid.values) {
    if (!(in >> v)) throw fail("truncated values");
  }
  return grid;
}

std::string ResidualTraceToCsv(const ResidualTrace& trace) {
  std::ostringstream out;
  out << "t,g\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i) {
    out << Fmt("%.17g", trace.times[i]) << "," << Fmt("%.17g", trace.values[i]) << "\n";
  }
  return out.str();
}

std::string GapReportToJson(const GapReport& r) {
  nlohmann::ordered_json j;
  j["orbit"] = r.orbit;
  j["aux_degree"] = r.aux_degree;
  j["certificate"] = r.certificate_id;
  j["bound"] = r.bound;
  j["average"] = r.average;
  j["epsilon"] = r.epsilon;
  j["trace_mean"] = r.trace_mean;
  j["M"] = r.M;
  j["markov_bound"] = r.markov_bound;
  j["occupancy"] = r.occupancy;
  return j.dump(2) + "\n";
}

}  // namespace ergobound
