#include "ricci/space.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace ricci {

using nlohmann::json;

bool IndexSet::operator<(const IndexSet& o) const {
  int c = count(), oc = o.count();
  if (c != oc) return c < oc;
  auto a = members(), b = o.members();
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

std::string IndexSet::str() const {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (int i : members()) {
    if (!first) os << ",";
    os << (i + 1);
    first = false;
  }
  os << "}";
  return os.str();
}

namespace {

void require_positive_coords(const Vector& v) {
  for (int i = 0; i < v.size(); ++i)
    if (!(v[i] > 0.0) || !std::isfinite(v[i]))
      throw spec_error("non-positive coordinate at index " + std::to_string(i + 1));
}

}  // namespace

MetricPoint MetricPoint::from_x(Vector x) {
  require_positive_coords(x);
  return MetricPoint(Chart::X, std::move(x));
}

MetricPoint MetricPoint::from_y(Vector y) {
  require_positive_coords(y);
  return MetricPoint(Chart::Y, std::move(y));
}

Vector MetricPoint::as_x() const { return chart_ == Chart::X ? coords_ : coords_.cwiseInverse(); }

Vector MetricPoint::as_y() const { return chart_ == Chart::Y ? coords_ : coords_.cwiseInverse(); }

MetricPoint x_to_y(const MetricPoint& p) { return MetricPoint::from_y(p.as_y()); }

MetricPoint y_to_x(const MetricPoint& p) { return MetricPoint::from_x(p.as_x()); }

SpaceSpec SpaceSpec::make(std::string name, std::vector<int> dims, Vector killing,
                          const std::map<std::array<int, 3>, double>& triples,
                          std::map<IndexSet, std::vector<IndexSet>> base_partitions) {
  SpaceSpec s;
  s.name_ = std::move(name);
  s.r_ = static_cast<int>(dims.size());
  if (s.r_ < 1 || s.r_ > 32) throw spec_error("module count must be in [1,32]");
  if (killing.size() != s.r_) throw spec_error("killing constants must match module count");
  for (int d : dims)
    if (d < 1) throw spec_error("module dimension must be >= 1");
  for (int i = 0; i < s.r_; ++i)
    if (killing[i] < 0.0) throw spec_error("killing constant must be >= 0");
  if (killing.maxCoeff() <= 0.0) throw spec_error("flat space excluded: all killing constants vanish");
  s.dims_ = std::move(dims);
  s.killing_ = std::move(killing);

  // Canonicalize entries, rejecting conflicting duplicates.
  std::map<std::array<int, 3>, double> canon;
  for (const auto& [idx, value] : triples) {
    for (int i : idx)
      if (i < 0 || i >= s.r_) throw spec_error("triple index out of range");
    if (value < 0.0) throw spec_error("structure constant must be >= 0");
    std::array<int, 3> key = idx;
    std::sort(key.begin(), key.end());
    auto it = canon.find(key);
    if (it != canon.end()) {
      if (std::abs(it->second - value) > 1e-14 * (1.0 + std::abs(value)))
        throw spec_error("conflicting values for symmetric triple");
    } else {
      canon[key] = value;
    }
  }
  s.triples_.assign(static_cast<std::size_t>(s.r_) * s.r_ * s.r_, 0.0);
  for (const auto& [key, value] : canon) {
    std::array<int, 3> p = key;
    std::sort(p.begin(), p.end());
    do {
      s.triples_[(p[0] * s.r_ + p[1]) * s.r_ + p[2]] = value;
    } while (std::next_permutation(p.begin(), p.end()));
  }

  for (const auto& [J, blocks] : base_partitions) {
    if (J.empty() || J.count() >= s.r_) throw spec_error("partition stratum must be a proper nonempty subset");
    IndexSet comp = J.complement(s.r_);
    IndexSet seen;
    for (const IndexSet& b : blocks) {
      if (b.empty()) throw spec_error("empty partition block");
      if (!b.subset_of(comp)) throw spec_error("partition block not contained in the base index set");
      if (!b.intersect(seen).empty()) throw spec_error("partition blocks overlap");
      seen = seen.unite(b);
    }
    if (seen != comp) throw spec_error("partition blocks do not cover the base index set");
  }
  s.base_partitions_ = std::move(base_partitions);
  return s;
}

int SpaceSpec::total_dim() const {
  int n = 0;
  for (int d : dims_) n += d;
  return n;
}

std::vector<IndexSet> SpaceSpec::base_partition(IndexSet J) const {
  auto it = base_partitions_.find(J);
  if (it != base_partitions_.end()) return it->second;
  std::vector<IndexSet> blocks;
  for (int i : J.complement(r_).members()) blocks.push_back(IndexSet::single(i));
  return blocks;
}

bool SpaceSpec::is_subalgebra(IndexSet J) const {
  for (int j : J.members())
    for (int k : J.members())
      for (int l : J.complement(r_).members())
        if (triple(j, k, l) != 0.0) return false;
  return true;
}

SpaceSpec load_space(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::exception& e) {
    throw spec_error(std::string("malformed space document: ") + e.what());
  }
  try {
    std::string name = doc.at("name").get<std::string>();
    std::vector<int> dims;
    std::vector<double> bs;
    for (const auto& m : doc.at("modules")) {
      dims.push_back(m.at("dim").get<int>());
      bs.push_back(m.at("b").get<double>());
    }
    Vector killing = Eigen::Map<const Vector>(bs.data(), static_cast<long>(bs.size()));
    std::map<std::array<int, 3>, double> triples;
    if (doc.contains("triples")) {
      for (const auto& t : doc.at("triples")) {
        std::array<int, 3> idx = {t.at("i").get<int>() - 1, t.at("j").get<int>() - 1,
                                  t.at("k").get<int>() - 1};
        double v = t.at("value").get<double>();
        std::array<int, 3> key = idx;
        std::sort(key.begin(), key.end());
        auto it = triples.find(key);
        if (it != triples.end()) {
          if (std::abs(it->second - v) > 1e-14 * (1.0 + std::abs(v)))
            throw spec_error("conflicting values for symmetric triple");
        } else {
          triples[key] = v;
        }
      }
    }
    std::map<IndexSet, std::vector<IndexSet>> partitions;
    if (doc.contains("base_partitions")) {
      for (const auto& [key, blocks] : doc.at("base_partitions").items()) {
        IndexSet J;
        std::stringstream ss(key);
        std::string tok;
        while (std::getline(ss, tok, ',')) J = J.unite(IndexSet::single(std::stoi(tok) - 1));
        std::vector<IndexSet> bl;
        for (const auto& b : blocks) {
          IndexSet block;
          for (int i : b) block = block.unite(IndexSet::single(i - 1));
          bl.push_back(block);
        }
        partitions[J] = std::move(bl);
      }
    }
    return SpaceSpec::make(std::move(name), std::move(dims), std::move(killing), triples,
                           std::move(partitions));
  } catch (const json::exception& e) {
    throw spec_error(std::string("malformed space document: ") + e.what());
  }
}

namespace {

std::string wallach_document(const std::string& name, int d1, int d2, int d3, double c123) {
  json doc;
  doc["name"] = name;
  doc["modules"] = json::array({{{"dim", d1}, {"b", 1.0}}, {{"dim", d2}, {"b", 1.0}}, {{"dim", d3}, {"b", 1.0}}});
  doc["triples"] = json::array({{{"i", 1}, {"j", 2}, {"k", 3}, {"value", c123}}});
  doc["base_partitions"] = {
      {"1", json::array({json::array({2, 3})})},
      {"2", json::array({json::array({1, 3})})},
      {"3", json::array({json::array({1, 2})})},
  };
  return doc.dump();
}

const char* kG2U2Document = R"({
  "name": "g2_u2",
  "modules": [{"dim": 4, "b": 1.0}, {"dim": 2, "b": 1.0}, {"dim": 4, "b": 1.0}],
  "triples": [
    {"i": 1, "j": 1, "k": 2, "value": 0.6666666666666666},
    {"i": 1, "j": 2, "k": 3, "value": 0.5}
  ],
  "base_partitions": {
    "2": [[1, 3]],
    "3": [[1, 2]]
  }
})";

const char* kF4U3SU2Document = R"({
  "name": "f4_u3su2",
  "modules": [{"dim": 12, "b": 1.0}, {"dim": 18, "b": 1.0}, {"dim": 4, "b": 1.0}, {"dim": 6, "b": 1.0}],
  "triples": [
    {"i": 1, "j": 1, "k": 2, "value": 2.0},
    {"i": 1, "j": 2, "k": 3, "value": 1.0},
    {"i": 2, "j": 2, "k": 4, "value": 2.0},
    {"i": 1, "j": 3, "k": 4, "value": 0.6666666666666666}
  ],
  "base_partitions": {
    "3": [[1, 2, 4]],
    "4": [[1, 3], [2]],
    "2,4": [[1, 3]]
  }
})";

}  // namespace

std::string catalog_document(const std::string& name) {
  if (name == "wallach_su3") return wallach_document("wallach_su3", 2, 2, 2, 1.0 / 3.0);
  if (name == "g2_u2") return kG2U2Document;
  if (name == "f4_u3su2") return kF4U3SU2Document;
  if (name.rfind("generalized_wallach(", 0) == 0 && name.back() == ')') {
    std::string args = name.substr(20, name.size() - 21);
    std::stringstream ss(args);
    std::string tok;
    std::vector<double> vals;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 4) throw spec_error("generalized_wallach expects (d1,d2,d3,[123])");
    return wallach_document(name, static_cast<int>(vals[0]), static_cast<int>(vals[1]),
                            static_cast<int>(vals[2]), vals[3]);
  }
  throw spec_error("unknown catalog space: " + name);
}

SpaceSpec catalog(const std::string& name) { return load_space(catalog_document(name)); }

std::vector<Stratum> enumerate_strata(const SpaceSpec& space) {
  const int r = space.rank();
  std::vector<IndexSet> sets;
  for (std::uint32_t bits = 1; bits + 1 < (1u << r); ++bits) sets.emplace_back(bits);
  std::sort(sets.begin(), sets.end());
  std::vector<Stratum> out;
  out.reserve(sets.size());
  for (IndexSet J : sets)
    out.push_back({J, space.is_subalgebra(J) ? StratumKind::Subalgebra : StratumKind::Infinity});
  return out;
}

SpaceSpec restrict_to_fiber(const SpaceSpec& space, IndexSet J) {
  if (J.empty() || J.count() >= space.rank())
    throw spec_error("fiber stratum must be a proper nonempty subset");
  if (!space.is_subalgebra(J)) throw spec_error("not a subalgebra stratum: " + J.str());
  const auto mem = J.members();
  const auto comp = J.complement(space.rank()).members();
  std::vector<int> dims;
  Vector killing(static_cast<long>(mem.size()));
  for (std::size_t a = 0; a < mem.size(); ++a) {
    int j = mem[a];
    dims.push_back(space.dim(j));
    double corr = 0.0;
    for (int k : comp)
      for (int l : comp) corr += space.triple(j, k, l);
    killing[static_cast<long>(a)] = space.killing(j) - corr / space.dim(j);
  }
  std::map<std::array<int, 3>, double> triples;
  for (std::size_t a = 0; a < mem.size(); ++a)
    for (std::size_t b = a; b < mem.size(); ++b)
      for (std::size_t c = b; c < mem.size(); ++c) {
        double v = space.triple(mem[a], mem[b], mem[c]);
        if (v != 0.0)
          triples[{static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)}] = v;
      }
  // The corrected constants can vanish (toral fiber); bypass the flatness
  // check only if everything is zero and there are no triples.
  bool flat = true;
  for (long i = 0; i < killing.size(); ++i)
    if (killing[i] > 1e-15) flat = false;
  if (flat && triples.empty())
    throw spec_error("fiber over " + J.str() + " is flat (toral)");
  for (long i = 0; i < killing.size(); ++i)
    if (killing[i] < 0.0 && killing[i] > -1e-12) killing[i] = 0.0;
  return SpaceSpec::make(space.name() + "|fiber" + J.str(), std::move(dims), std::move(killing),
                         triples);
}

Candidate restrict_candidate(const Candidate& T, IndexSet J) {
  const auto mem = J.members();
  Vector out(static_cast<long>(mem.size()));
  for (std::size_t a = 0; a < mem.size(); ++a) out[static_cast<long>(a)] = T[mem[a]];
  return Candidate{std::move(out)};
}

double trace_y(const SpaceSpec& space, const Candidate& T, const Vector& y) {
  double tr = 0.0;
  for (int i = 0; i < space.rank(); ++i) tr += space.dim(i) * T[i] * y[i];
  return tr;
}

MetricPoint solve_constraint(const SpaceSpec& space, const Candidate& T, const Vector& y_partial,
                             int unknown_index) {
  if (unknown_index < 0 || unknown_index >= space.rank()) throw spec_error("unknown index out of range");
  if (T[unknown_index] == 0.0) throw spec_error("candidate component vanishes at the unknown index");
  double rest = 0.0;
  for (int i = 0; i < space.rank(); ++i) {
    if (i == unknown_index) continue;
    if (!(y_partial[i] > 0.0)) throw spec_error("non-positive coordinate in partial point");
    rest += space.dim(i) * T[i] * y_partial[i];
  }
  double yi = (1.0 - rest) / (space.dim(unknown_index) * T[unknown_index]);
  if (!(yi > 0.0)) throw spec_error("infeasible constraint: solved coordinate is not positive");
  Vector y = y_partial;
  y[unknown_index] = yi;
  return MetricPoint::from_y(std::move(y));
}

bool generalized_wallach_shape(const SpaceSpec& space) {
  if (space.rank() != 3) return false;
  if (space.triple(0, 1, 2) <= 0.0) return false;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      for (int k = j; k < 3; ++k) {
        bool distinct = (i != j) && (j != k);
        if (!distinct && space.triple(i, j, k) != 0.0) return false;
      }
  return true;
}

}  // namespace ricci
