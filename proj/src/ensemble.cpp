#include "streamfilter/ensemble.hpp"

#include <istream>
#include <limits>
#include <map>
#include <ostream>

#include "streamfilter/format.hpp"

namespace streamfilter {

Ensemble::Ensemble(int t, Matrix members) : t_(t), members_(std::move(members)) {
  if (members_.cols() < 2) throw ContractViolation("Ensemble: need at least 2 members");
}

std::vector<double> Ensemble::coordinate(Eigen::Index j) const {
  if (j < 0 || j >= dim()) throw ContractViolation("Ensemble::coordinate: index out of range");
  std::vector<double> out(static_cast<std::size_t>(size()));
  for (Eigen::Index s = 0; s < size(); ++s) out[static_cast<std::size_t>(s)] = members_(j, s);
  return out;
}

WeightedEnsemble WeightedEnsemble::uniform(Ensemble e) {
  const auto S = e.size();
  return {std::move(e), Vector::Constant(S, 1.0 / static_cast<double>(S))};
}

void write_ensemble(std::ostream& os, const Ensemble& e, const EnsembleHeader& header) {
  os << "# streamfilter ensemble\n";
  os << "# t=" << e.time() << "\n";
  os << "# S=" << e.size() << "\n";
  os << "# dim=" << e.dim() << "\n";
  os << "# model=" << header.model << "\n";
  os << "# lineage=" << header.lineage << "\n";
  os << "s,j,value\n";
  for (Eigen::Index s = 0; s < e.size(); ++s)
    for (Eigen::Index j = 0; j < e.dim(); ++j)
      os << (s + 1) << ',' << (j + 1) << ',' << format_real(e.members()(j, s)) << '\n';
}

Ensemble read_ensemble(std::istream& is, EnsembleHeader* header) {
  std::map<std::string, std::string, std::less<>> fields;
  std::string line;
  std::size_t lineno = 0;
  bool seen_columns = false;
  Matrix members;
  int t = 0;
  std::int64_t filled = 0;

  while (std::getline(is, line)) {
    ++lineno;
    auto view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      auto body = trim(view.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string_view::npos)
        fields[std::string(trim(body.substr(0, eq)))] = std::string(trim(body.substr(eq + 1)));
      continue;
    }
    if (!seen_columns) {
      if (view != "s,j,value") throw ParseError("expected column header 's,j,value'", lineno);
      seen_columns = true;
      auto get = [&](const char* key) {
        auto it = fields.find(key);
        if (it == fields.end()) throw ParseError(std::string("missing header field ") + key, lineno);
        auto v = parse_int(it->second);
        if (!v || *v < 0) throw ParseError(std::string("malformed header field ") + key, lineno);
        return *v;
      };
      t = static_cast<int>(get("t"));
      members = Matrix::Constant(get("dim"), get("S"), std::numeric_limits<double>::quiet_NaN());
      if (header) {
        header->model = fields.count("model") ? fields["model"] : "unknown";
        header->lineage = fields.count("lineage") ? fields["lineage"] : "";
      }
      continue;
    }
    auto parts = split(view, ',');
    if (parts.size() != 3) throw ParseError("expected 3 fields", lineno);
    auto s = parse_int(parts[0]);
    auto j = parse_int(parts[1]);
    auto v = parse_real(parts[2]);
    if (!s || !j || !v) throw ParseError("malformed row", lineno);
    if (*s < 1 || *s > members.cols() || *j < 1 || *j > members.rows())
      throw ParseError("member or coordinate index out of range", lineno);
    members(*j - 1, *s - 1) = *v;
    ++filled;
  }
  if (!seen_columns) throw ParseError("missing column header", lineno);
  if (filled != members.size()) throw ParseError("ensemble rows incomplete", lineno);
  return Ensemble(t, std::move(members));
}

}  // namespace streamfilter
