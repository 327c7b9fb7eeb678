#include "specflow/io.hpp"

#include <fstream>
#include <iomanip>

namespace specflow::io {

json form_to_json(const forms::TrigPolyForm& f) {
  json terms = json::array();
  for (const auto& [key, c] : f.terms()) {
    json term;
    term["k"] = key.k;
    json idx = json::array();
    for (int j : forms::mask_to_indices(key.mask)) idx.push_back(j + 1);
    term["I"] = idx;
    json re = json::array(), im = json::array();
    for (int r = 0; r < c.rows(); ++r) {
      json rrow = json::array(), irow = json::array();
      for (int cc = 0; cc < c.cols(); ++cc) {
        rrow.push_back(c(r, cc).real());
        irow.push_back(c(r, cc).imag());
      }
      re.push_back(rrow);
      im.push_back(irow);
    }
    term["re"] = re;
    term["im"] = im;
    terms.push_back(term);
  }
  return json{{"n", f.dim()}, {"degree", f.degree()}, {"fiber", f.fiber()}, {"terms", terms}};
}

forms::TrigPolyForm form_from_json(const json& j) {
  if (!j.contains("n") || !j.contains("degree"))
    throw ContractViolation("form document: missing n/degree");
  const int n = j.at("n").get<int>();
  const int degree = j.at("degree").get<int>();
  const int fiber = j.value("fiber", 1);
  forms::TrigPolyForm f(n, degree, fiber);
  for (const auto& term : j.value("terms", json::array())) {
    forms::Momentum k = term.at("k").get<std::vector<int>>();
    std::vector<int> idx1 = term.value("I", std::vector<int>{});
    std::vector<int> idx0;
    for (int v : idx1) idx0.push_back(v - 1);
    forms::Mat c(fiber, fiber);
    const auto& re = term.at("re");
    const auto& im = term.at("im");
    for (int r = 0; r < fiber; ++r)
      for (int cc = 0; cc < fiber; ++cc)
        c(r, cc) = forms::Complex(re.at(r).at(cc).get<double>(), im.at(r).at(cc).get<double>());
    f.add_term(k, forms::indices_to_mask(idx0, n), c);
  }
  f.prune();
  return f;
}

json connection_to_json(const Connection& c) {
  json j;
  j["n"] = c.n;
  j["fiber"] = c.fiber;
  j["hol"] = c.hol;
  j["osc"] = c.osc.is_zero() ? json() : form_to_json(c.osc);
  return j;
}

Connection connection_from_json(const json& j) {
  const int n = j.at("n").get<int>();
  std::vector<double> hol = j.at("hol").get<std::vector<double>>();
  forms::TrigPolyForm osc =
      j.contains("osc") && !j.at("osc").is_null() ? form_from_json(j.at("osc"))
                                                  : forms::TrigPolyForm::zero(n, 1, j.value("fiber", 1));
  return Connection(n, std::move(hol), std::move(osc));
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ContractViolation("write_csv: cannot open " + path.string());
  for (const auto& c : comments) out << "# " << c << "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  out << std::setprecision(17);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << "\n";
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ContractViolation("write_json: cannot open " + path.string());
  out << j.dump(2) << "\n";
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ContractViolation("read_json: cannot open " + path.string());
  json j;
  in >> j;
  return j;
}

}  // namespace specflow::io
