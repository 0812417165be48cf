#ifndef STREAMFILTER_ENSEMBLE_HPP_
#define STREAMFILTER_ENSEMBLE_HPP_

#include <iosfwd>
#include <string>
#include <vector>

#include "streamfilter/gaussian.hpp"

namespace streamfilter {

/// S parameter vectors approximating a posterior at time t. Members are the
/// columns of a dim x S matrix.
class Ensemble {
 public:
  Ensemble() = default;
  Ensemble(int t, Matrix members);

  int time() const { return t_; }
  Eigen::Index size() const { return members_.cols(); }
  Eigen::Index dim() const { return members_.rows(); }

  const Matrix& members() const { return members_; }
  auto member(Eigen::Index s) const { return members_.col(s); }
  /// Values of coordinate j across members.
  std::vector<double> coordinate(Eigen::Index j) const;

 private:
  int t_ = 0;
  Matrix members_;
};

/// Ensemble with normalized weights (only the bootstrap filter uses these).
struct WeightedEnsemble {
  Ensemble ensemble;
  Vector weights;  // sums to 1

  static WeightedEnsemble uniform(Ensemble e);
};

struct EnsembleHeader {
  std::string model = "unknown";
  std::string lineage;  // e.g. "master=1/dataset=3/run=0"
};

// Rows "s,j,value" (1-based member and coordinate), after a '#' header with
// t, S, dim, model id and seed lineage.
void write_ensemble(std::ostream& os, const Ensemble& e, const EnsembleHeader& header);
Ensemble read_ensemble(std::istream& is, EnsembleHeader* header = nullptr);

}  // namespace streamfilter

#endif  // STREAMFILTER_ENSEMBLE_HPP_
