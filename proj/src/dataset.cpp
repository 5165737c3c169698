#include "armaopt/dataset.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "armaopt/evaluate.hpp"

namespace armaopt {

namespace {

using nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ordered_json truth_to_json(const GroundTruth& g) {
  ordered_json j;
  j["phi"] = g.coeffs.phi;
  j["theta"] = g.coeffs.theta;
  j["sigma2"] = g.coeffs.sigma2;
  j["rho"] = g.pacf.rho;
  j["b"] = g.pacf.b;
  j["boundary"] = std::string(to_string(g.boundary.tag));
  return j;
}

GroundTruth truth_from_json(const nlohmann::json& j, double tau) {
  GroundTruth g;
  g.coeffs.phi = j.at("phi").get<std::vector<double>>();
  g.coeffs.theta = j.at("theta").get<std::vector<double>>();
  g.coeffs.sigma2 = j.at("sigma2").get<double>();
  g.pacf.rho = j.at("rho").get<std::vector<double>>();
  g.pacf.b = j.at("b").get<std::vector<double>>();
  g.pacf.sigma2 = g.coeffs.sigma2;
  g.boundary = classify_boundary(g.pacf, tau);
  const std::string tag = j.at("boundary").get<std::string>();
  if (to_string(g.boundary.tag) != tag)
    throw std::runtime_error("manifest boundary class does not recompute: " +
                             tag);
  return g;
}

}  // namespace

void write_series_csv(const std::filesystem::path& path,
                      std::span<const double> y) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open for writing: " + path.string());
  out << "t,y\n";
  for (std::size_t t = 0; t < y.size(); ++t)
    out << t << ',' << fmt_double(y[t]) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::vector<double> read_series_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,y", 0) != 0)
    throw std::runtime_error("bad series header in " + path.string());
  std::vector<double> y;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error("bad series row in " + path.string());
    y.push_back(std::stod(line.substr(comma + 1)));
  }
  return y;
}

void write_dataset(const std::filesystem::path& dir, const DatasetSpec& spec,
                   std::span<const SimulatedSeries> series) {
  std::filesystem::create_directories(dir);
  ordered_json manifest;
  manifest["seed"] = spec.seed;
  manifest["epsilon"] = spec.eps;
  manifest["tau"] = spec.tau;
  manifest["series"] = ordered_json::array();
  for (const SimulatedSeries& s : series) {
    char name[32];
    std::snprintf(name, sizeof(name), "series_%05d.csv", s.series_id);
    write_series_csv(dir / name, s.values);

    ordered_json row;
    row["series_id"] = s.series_id;
    row["order"] = {{"p", s.order.p}, {"q", s.order.q}};
    row["length"] = s.length;
    row["sigma"] = s.sigma;
    row["seed"] = s.seed;
    row["truth"] = truth_to_json(s.truth);
    row["file"] = name;
    manifest["series"].push_back(std::move(row));
  }
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

Dataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in)
    throw std::runtime_error("no manifest.json in " + dir.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed manifest: " + std::string(e.what()));
  }

  Dataset ds;
  ds.dir = dir;
  ds.seed = manifest.at("seed").get<std::uint64_t>();
  ds.epsilon = manifest.value("epsilon", 1e-2);
  ds.tau = manifest.value("tau", 2e-2);
  for (const auto& row : manifest.at("series")) {
    DatasetEntry e;
    e.series_id = row.at("series_id").get<int>();
    e.order.p = row.at("order").at("p").get<int>();
    e.order.q = row.at("order").at("q").get<int>();
    e.length = row.at("length").get<std::size_t>();
    e.sigma = row.at("sigma").get<double>();
    e.seed = row.at("seed").get<std::uint64_t>();
    e.truth = truth_from_json(row.at("truth"), ds.tau);
    e.file = row.at("file").get<std::string>();
    ds.entries.push_back(std::move(e));
  }
  return ds;
}

std::vector<double> Dataset::load(const DatasetEntry& e) const {
  std::vector<double> y = read_series_csv(dir / e.file);
  if (y.size() != e.length)
    throw std::runtime_error("series length mismatch for " + e.file);
  return y;
}

}  // namespace armaopt
