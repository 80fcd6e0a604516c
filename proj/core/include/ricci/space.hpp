#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ricci {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Raised on malformed space documents, invariant violations and bad inputs.
class spec_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Subset of the module indices {0, ..., r-1}, stored as a bitmask.
class IndexSet {
public:
  IndexSet() = default;
  explicit IndexSet(std::uint32_t bits) : bits_(bits) {}
  static IndexSet single(int i) { return IndexSet(1u << i); }
  static IndexSet of(std::initializer_list<int> idx) {
    IndexSet s;
    for (int i : idx) s.bits_ |= 1u << i;
    return s;
  }
  static IndexSet full(int r) { return IndexSet((r == 32) ? ~0u : ((1u << r) - 1u)); }

  std::uint32_t bits() const { return bits_; }
  bool contains(int i) const { return (bits_ >> i) & 1u; }
  bool empty() const { return bits_ == 0; }
  int count() const { return __builtin_popcount(bits_); }
  bool subset_of(IndexSet other) const { return (bits_ & ~other.bits_) == 0; }
  IndexSet complement(int r) const { return IndexSet(full(r).bits_ & ~bits_); }
  IndexSet unite(IndexSet other) const { return IndexSet(bits_ | other.bits_); }
  IndexSet intersect(IndexSet other) const { return IndexSet(bits_ & other.bits_); }

  /// Members in ascending order.
  std::vector<int> members() const {
    std::vector<int> out;
    for (int i = 0; i < 32; ++i)
      if (contains(i)) out.push_back(i);
    return out;
  }

  bool operator==(const IndexSet& o) const { return bits_ == o.bits_; }
  bool operator!=(const IndexSet& o) const { return bits_ != o.bits_; }
  /// Order by cardinality, then lexicographically on the ascending member lists.
  bool operator<(const IndexSet& o) const;

  /// Human-readable 1-based form, e.g. "{1,3}".
  std::string str() const;

private:
  std::uint32_t bits_ = 0;
};

enum class StratumKind { Subalgebra, Infinity };

/// Boundary stratum of the simplex, marked by whether h + m_J closes under
/// the bracket at the structure-constant level.
struct Stratum {
  IndexSet members;
  StratumKind kind = StratumKind::Infinity;
};

/// Diagonal candidate tensor T, componentwise against Q.
struct Candidate {
  Vector components;

  bool definite() const { return components.size() > 0 && components.minCoeff() > 0.0; }
  double operator[](int i) const { return components[i]; }
  int size() const { return static_cast<int>(components.size()); }
};

enum class Chart { X, Y };

/// Diagonal metric in either the eigenvalue chart (x) or the reciprocal
/// chart (y = 1/x). All coordinates are strictly positive.
class MetricPoint {
public:
  MetricPoint() = default;  // empty placeholder; factories validate real points
  static MetricPoint from_x(Vector x);
  static MetricPoint from_y(Vector y);

  Chart chart() const { return chart_; }
  const Vector& coords() const { return coords_; }
  int size() const { return static_cast<int>(coords_.size()); }

  /// Coordinates in the requested chart (exact reciprocal when converting).
  Vector as_x() const;
  Vector as_y() const;

private:
  MetricPoint(Chart c, Vector v) : chart_(c), coords_(std::move(v)) {}
  Chart chart_ = Chart::X;
  Vector coords_;
};

MetricPoint x_to_y(const MetricPoint& p);
MetricPoint y_to_x(const MetricPoint& p);

/// Structure-constant model of a compact homogeneous space G/H:
/// module dimensions d_i, Killing constants b_i (B|m_i = -b_i Q|m_i) and the
/// fully symmetric non-negative constants [ijk]. Immutable after construction.
class SpaceSpec {
public:
  /// Validates the invariants and symmetrizes the triple table.
  /// `triples` maps arbitrary-order index triples to values; conflicting
  /// duplicates are rejected, consistent ones collapse to one entry.
  static SpaceSpec make(std::string name, std::vector<int> dims, Vector killing,
                        const std::map<std::array<int, 3>, double>& triples,
                        std::map<IndexSet, std::vector<IndexSet>> base_partitions = {});

  const std::string& name() const { return name_; }
  int rank() const { return r_; }
  int dim(int i) const { return dims_[i]; }
  const std::vector<int>& dims() const { return dims_; }
  double killing(int i) const { return killing_[i]; }
  const Vector& killing() const { return killing_; }
  double triple(int i, int j, int k) const { return triples_[(i * r_ + j) * r_ + k]; }

  /// Total dimension of G/H.
  int total_dim() const;

  /// Ad_K-irreducible base blocks declared for the subalgebra stratum J.
  /// Defaults to singleton blocks when no partition was supplied.
  std::vector<IndexSet> base_partition(IndexSet J) const;
  bool has_base_partition(IndexSet J) const { return base_partitions_.count(J) > 0; }

  /// True when [jkl] = 0 for all j,k in J and l outside J.
  bool is_subalgebra(IndexSet J) const;

private:
  std::string name_;
  int r_ = 0;
  std::vector<int> dims_;
  Vector killing_;
  std::vector<double> triples_;  // dense r^3, fully symmetric
  std::map<IndexSet, std::vector<IndexSet>> base_partitions_;
};

/// Parse and validate a space document (JSON text, schema in the docs).
SpaceSpec load_space(const std::string& document);

/// Bundled example spaces: "wallach_su3", "g2_u2", "f4_u3su2" and the
/// parametrized family "generalized_wallach(d1,d2,d3,c)" with c = [123].
SpaceSpec catalog(const std::string& name);

/// JSON document of a bundled space (same schema accepted by load_space).
std::string catalog_document(const std::string& name);

/// All 2^r - 2 strata ordered by cardinality then lexicographically.
std::vector<Stratum> enumerate_strata(const SpaceSpec& space);

/// Fiber space K/H over a subalgebra stratum J: dimensions d_j, corrected
/// Killing constants  b'_j = b_j - (1/d_j) sum_{k,l not in J} [jkl],
/// and triples restricted to J^3. Module order follows ascending J.
SpaceSpec restrict_to_fiber(const SpaceSpec& space, IndexSet J);

/// Restriction of a candidate to the stratum's modules (ascending order).
Candidate restrict_candidate(const Candidate& T, IndexSet J);

/// Solve sum_i d_i T_i y_i = 1 for the single unknown coordinate.
/// `y_partial` supplies all other coordinates; throws when the solved
/// coordinate is not strictly positive.
MetricPoint solve_constraint(const SpaceSpec& space, const Candidate& T, const Vector& y_partial,
                             int unknown_index);

/// sum_i d_i T_i y_i for a y-chart coordinate vector.
double trace_y(const SpaceSpec& space, const Candidate& T, const Vector& y);

/// True for the generalized Wallach shape: three modules with [123] the
/// only non-vanishing structure constant.
bool generalized_wallach_shape(const SpaceSpec& space);

}  // namespace ricci
