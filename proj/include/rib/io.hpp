#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rib/blockfact.hpp"
#include "rib/operator.hpp"
#include "rib/ribsel.hpp"
#include "rib/space.hpp"

namespace rib::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

// --- spaces -----------------------------------------------------------

// {"family":"lp","p":2.0,"dim":64} with "p":"inf" for the sup norm, or
// {"family":"lorentz","weights":[1.0,0.5,...]}; optional "cu"/"cs".
inline SpaceSpec space_from_json(const json& j) {
  if (!j.is_object() || !j.contains("family"))
    throw std::invalid_argument("space: expected an object with \"family\"");
  const std::string family = j.at("family").get<std::string>();
  const double cu = j.value("cu", 1.0);
  const double cs = j.value("cs", 1.0);
  if (family == "lp") {
    double p;
    const json& pj = j.at("p");
    if (pj.is_string()) {
      const std::string ps = pj.get<std::string>();
      if (ps == "inf" || ps == "Inf" || ps == "infinity")
        p = std::numeric_limits<double>::infinity();
      else
        throw std::invalid_argument("space: unrecognized p value \"" + ps +
                                    "\"");
    } else {
      p = pj.get<double>();
    }
    return SpaceSpec::lp(p, j.at("dim").get<int>(), cu, cs);
  }
  if (family == "lorentz") {
    auto weights = j.at("weights").get<std::vector<double>>();
    if (j.contains("dim") &&
        j.at("dim").get<int>() != static_cast<int>(weights.size()))
      throw std::invalid_argument("space: dim does not match weights length");
    return SpaceSpec::lorentz(std::move(weights), cu, cs);
  }
  throw std::invalid_argument("space: unknown family \"" + family + "\"");
}

inline json space_to_json(const SpaceSpec& s) {
  json j;
  if (s.is_lp()) {
    j["family"] = "lp";
    if (s.infinite_p())
      j["p"] = "inf";
    else
      j["p"] = s.p();
  } else {
    j["family"] = "lorentz";
    j["weights"] = s.weights();
  }
  j["dim"] = s.dim();
  if (s.cu() != 1.0) j["cu"] = s.cu();
  if (s.cs() != 1.0) j["cs"] = s.cs();
  return j;
}

inline SpaceSpec load_space(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open space file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("space file " + path + ": " + e.what());
  }
  return space_from_json(j);
}

// --- matrices ---------------------------------------------------------

// CSV rows as lines; entry (i, j) is <T e_j, e_i*>, so column j holds the
// coordinates of T e_j.
inline Operator matrix_from_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    int col = 0;
    while (pos <= line.size()) {
      ++col;
      std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      const char* first = line.data() + pos;
      const char* last = line.data() + comma;
      while (first < last && (*first == ' ' || *first == '\t')) ++first;
      while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
      double value;
      const auto res = std::from_chars(first, last, value);
      if (res.ec != std::errc{} || res.ptr != last)
        throw std::invalid_argument("matrix CSV parse error at line " +
                                    std::to_string(lineno) + ", column " +
                                    std::to_string(col));
      row.push_back(value);
      pos = comma + 1;
      if (comma == line.size()) break;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("matrix CSV: empty input");
  const std::size_t n = rows.size();
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n)
      throw std::invalid_argument(
          "matrix CSV: line " + std::to_string(i + 1) + " has " +
          std::to_string(rows[i].size()) + " entries, expected " +
          std::to_string(n));
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return Operator(std::move(m));
}

// {"dim":n,"rows":[[...],...]}
inline Operator matrix_from_json(const json& j) {
  const int n = j.at("dim").get<int>();
  const auto& rows = j.at("rows");
  if (!rows.is_array() || static_cast<int>(rows.size()) != n)
    throw std::invalid_argument("matrix JSON: expected " + std::to_string(n) +
                                " rows");
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    const auto row = rows.at(i).get<std::vector<double>>();
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("matrix JSON: row " + std::to_string(i + 1) +
                                  " has wrong length");
    for (int jx = 0; jx < n; ++jx) m(i, jx) = row[jx];
  }
  return Operator(std::move(m));
}

inline Operator load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open matrix file: " + path);
  if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") {
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw std::invalid_argument("matrix file " + path + ": " + e.what());
    }
    return matrix_from_json(j);
  }
  return matrix_from_csv(in);
}

inline json matrix_to_json(const Eigen::MatrixXd& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(i, c));
  j["data"] = std::move(data);  // row-major
  return j;
}

// --- index sets and block systems (1-based in all file formats) --------

inline json indices_to_json(const std::vector<int>& zero_based) {
  json a = json::array();
  for (int i : zero_based) a.push_back(i + 1);
  return a;
}

inline std::vector<int> indices_from_json(const json& a) {
  std::vector<int> out;
  for (const auto& v : a) {
    const int i = v.get<int>();
    if (i < 1) throw std::invalid_argument("indices are 1-based");
    out.push_back(i - 1);
  }
  return out;
}

// {"L":2,"blocks":[[1,2],[3,4]],"signs":[[1,-1],[1,-1]]}
inline BlockSystem blocksystem_from_json(const json& j) {
  BlockSystem sys;
  sys.L = j.at("L").get<int>();
  for (const auto& b : j.at("blocks")) sys.blocks.push_back(indices_from_json(b));
  for (const auto& e : j.at("signs"))
    sys.signs.push_back(e.get<std::vector<int>>());
  return sys;
}

inline json blocksystem_to_json(const BlockSystem& sys) {
  json j;
  j["L"] = sys.L;
  json blocks = json::array();
  for (const auto& b : sys.blocks) blocks.push_back(indices_to_json(b));
  j["blocks"] = std::move(blocks);
  j["signs"] = sys.signs;
  return j;
}

// --- certificates -----------------------------------------------------

inline json to_json(const SelectionCertificate& c) {
  json j;
  j["sigma"] = indices_to_json(c.sigma);
  j["offdiag_norm"] = c.offdiag_norm;
  j["inverse_norm"] = c.inverse_norm;
  j["neumann_bound"] = c.neumann_bound;
  j["guarantee_size"] = c.guarantee_size;
  j["window_satisfied"] = c.window_satisfied;
  j["trials_used"] = c.trials_used;
  j["seed"] = c.seed;
  return j;
}

inline json to_json(const FactorizationCertificate& c) {
  json j;
  j["sigma"] = indices_to_json(c.sigma);
  j["E"] = matrix_to_json(c.e);
  j["P"] = matrix_to_json(c.p);
  j["residual"] = c.residual;
  if (c.norm_product) {
    j["norm_product"] = *c.norm_product;
    j["norm_product_mode"] = c.norm_product_exact ? "exact" : "upper";
  } else {
    j["norm_product"] = nullptr;
    j["norm_product_mode"] = nullptr;
  }
  j["bound"] = c.bound;
  return j;
}

inline json to_json(const SelectionParams& p) {
  json j;
  j["delta"] = p.delta;
  j["gamma"] = p.gamma;
  j["eta"] = p.eta;
  j["kappa1"] = p.kappa1;
  j["kappa2"] = p.kappa2;
  j["alpha"] = p.alpha;
  j["alpha_clamped"] = p.alpha_clamped;
  j["tau_n"] = p.tau_n;
  j["n"] = p.n;
  j["seed"] = p.seed;
  j["max_trials"] = p.max_trials;
  j["window_lower"] = p.window_lower;
  j["window_upper"] = p.window_upper;
  return j;
}

// 17 significant digits: round-trip safe for 64-bit floats (CSV output).
inline std::string format_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace rib::io
