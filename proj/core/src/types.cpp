#include "afape/types.hpp"

#include <cmath>

namespace afape {

bool mask_leq(const StepMask& a_prime, const StepMask& a) {
  if (a_prime.size() != a.size())
    throw InvalidInput("mask_leq: length mismatch");
  // a' <= a elementwise iff a' has no bit outside a.
  return (a_prime.bits() & ~a.bits()) == 0;
}

int SuperfeatureMap::num_sub() const {
  int n = 0;
  for (const auto& g : groups) n += static_cast<int>(g.size());
  return n;
}

int SuperfeatureMap::super_of(int col) const {
  for (int k = 0; k < num_super(); ++k)
    for (int j : groups[k])
      if (j == col) return k;
  throw InvalidInput("SuperfeatureMap: column not in any group");
}

void SuperfeatureMap::validate() const {
  if (free_set.size() != groups.size())
    throw InvalidInput("SuperfeatureMap: free_set size mismatch");
  const int d = num_sub();
  std::vector<int> seen(d, 0);
  for (const auto& g : groups) {
    if (g.empty()) throw InvalidInput("SuperfeatureMap: empty group");
    for (int j : g) {
      if (j < 0 || j >= d) throw InvalidInput("SuperfeatureMap: column out of range");
      if (seen[j]++) throw InvalidInput("SuperfeatureMap: column appears twice");
    }
  }
}

SuperfeatureMap SuperfeatureMap::experiment_default() {
  SuperfeatureMap m;
  m.groups = {{0}, {1}, {2, 3}};
  m.free_set = {true, false, false};
  return m;
}

bool FullPanel::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

int ObservedPanel::missing_count() const {
  int n = 0;
  for (const auto& c : cells_)
    if (!c) ++n;
  return n;
}

ObservedPanel apply_mask(const FullPanel& full, const MaskTrajectory& masks,
                         const SuperfeatureMap& map) {
  const int T = full.steps();
  const int d = full.cols();
  if (static_cast<int>(masks.size()) != T)
    throw InvalidInput("apply_mask: mask trajectory length != T");
  if (map.num_sub() != d)
    throw InvalidInput("apply_mask: superfeature map does not cover panel columns");
  for (const auto& m : masks)
    if (m.size() != map.num_super())
      throw InvalidInput("apply_mask: mask width != number of superfeatures");

  ObservedPanel out(T, d);
  for (int j = 0; j < d; ++j) out.set(0, j, full(0, j));  // X^0 = U^0
  for (int t = 1; t <= T; ++t) {
    const StepMask& m = masks[t - 1];
    for (int k = 0; k < map.num_super(); ++k) {
      if (!m.bit(k)) continue;
      for (int j : map.groups[k]) out.set(t, j, full(t, j));
    }
  }
  return out;
}

void CostSpec::validate(const SuperfeatureMap& map) const {
  if (static_cast<int>(c_acq.size()) != map.num_super())
    throw InvalidInput("CostSpec: c_acq size != number of superfeatures");
  for (int k = 0; k < map.num_super(); ++k) {
    if (c_acq[k] < 0) throw InvalidInput("CostSpec: negative acquisition cost");
    if (map.is_free(k) && c_acq[k] != 0.0)
      throw InvalidInput("CostSpec: free superfeature with nonzero cost");
  }
  if (c_mc < 0) throw InvalidInput("CostSpec: negative misclassification cost");
}

CostSpec CostSpec::experiment_default() {
  CostSpec c;
  c.c_acq = {0.0, 1.0, 1.0};
  c.c_mc = 12.0;
  return c;
}

double acquisition_cost(const StepMask& a_prime, const CostSpec& costs) {
  if (a_prime.size() != static_cast<int>(costs.c_acq.size()))
    throw InvalidInput("acquisition_cost: mask width != cost vector length");
  double s = 0.0;
  for (int k = 0; k < a_prime.size(); ++k)
    if (a_prime.bit(k)) s += costs.c_acq[k];
  return s;
}

void Record::validate(const SuperfeatureMap& map) const {
  const int T = observed.steps();
  if (static_cast<int>(masks.size()) != T)
    throw InvalidInput("Record: masks length != T");
  if (static_cast<int>(labels.size()) != T)
    throw InvalidInput("Record: labels length != T");
  for (int j = 0; j < observed.cols(); ++j)
    if (!observed.observed(0, j)) throw InvalidInput("Record: row 0 must be observed");
  for (int t = 1; t <= T; ++t) {
    for (int k = 0; k < map.num_super(); ++k) {
      const bool acquired = masks[t - 1].bit(k);
      for (int j : map.groups[k]) {
        if (observed.observed(t, j) != acquired)
          throw InvalidInput("Record: observation pattern inconsistent with masks");
        if (truth && acquired && observed.cell(t, j) != (*truth)(t, j))
          throw InvalidInput("Record: truth disagrees with an observed cell");
      }
    }
  }
}

bool Record::complete_case() const {
  for (const auto& m : masks)
    if (!m.all()) return false;
  return true;
}

bool Record::complete_through(int t) const {
  for (int s = 1; s <= t; ++s)
    if (!masks[s - 1].all()) return false;
  return true;
}

std::pair<int, int> Dataset::split_range(Split s) const {
  const int n_total = n();
  const int n_train = static_cast<int>(split.train * n_total);
  const int n_nuis = static_cast<int>(split.nuisance * n_total);
  switch (s) {
    case Split::Train:
      return {0, n_train};
    case Split::Nuisance:
      return {n_train, n_train + n_nuis};
    case Split::Test:
      return {n_train + n_nuis, n_total};
  }
  return {0, 0};
}

std::vector<int> Dataset::split_indices(Split s) const {
  auto [b, e] = split_range(s);
  std::vector<int> out;
  out.reserve(e - b);
  for (int i = b; i < e; ++i) out.push_back(i);
  return out;
}

}  // namespace afape
