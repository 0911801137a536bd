#pragma once
// Domain types shared by every module: superfeature grouping, per-step
// acquisition masks, feature panels with explicit missingness, records,
// datasets and cost specifications.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace afape {

struct InvalidInput : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when an inverse-probability denominator has no mass. Carries the
// (record id, step) where the violation was encountered.
struct PositivityError : std::runtime_error {
  PositivityError(const std::string& what, long long record_id, int step)
      : std::runtime_error(what + " (record " + std::to_string(record_id) +
                           ", t=" + std::to_string(step) + ")"),
        record_id(record_id),
        step(step) {}
  long long record_id;
  int step;
};

// ---------------------------------------------------------------------------
// StepMask: one acquisition decision over K superfeatures.
// ---------------------------------------------------------------------------

class StepMask {
 public:
  StepMask() = default;
  StepMask(std::uint32_t bits, int k) : bits_(bits), k_(k) {
    if (k < 0 || k > 12) throw InvalidInput("StepMask: K must be in [0,12]");
    bits_ &= mask_of(k);
  }
  static StepMask zeros(int k) { return StepMask(0u, k); }
  static StepMask ones(int k) { return StepMask(mask_of(k), k); }

  int size() const { return k_; }
  std::uint32_t bits() const { return bits_; }
  bool bit(int i) const { return (bits_ >> i) & 1u; }
  void set_bit(int i, bool v) {
    if (v)
      bits_ |= (1u << i);
    else
      bits_ &= ~(1u << i);
  }
  int count() const { return __builtin_popcount(bits_); }
  bool all() const { return bits_ == mask_of(k_); }
  bool none() const { return bits_ == 0; }

  bool operator==(const StepMask& o) const {
    return bits_ == o.bits_ && k_ == o.k_;
  }
  bool operator!=(const StepMask& o) const { return !(*this == o); }

 private:
  static std::uint32_t mask_of(int k) { return (k >= 32) ? ~0u : ((1u << k) - 1u); }
  std::uint32_t bits_ = 0;
  int k_ = 0;
};

// Elementwise partial order: a' <= a iff a'_i <= a_i for every i.
bool mask_leq(const StepMask& a_prime, const StepMask& a);

using MaskTrajectory = std::vector<StepMask>;  // one StepMask per t = 1..T

// ---------------------------------------------------------------------------
// Superfeature grouping
// ---------------------------------------------------------------------------

// Superfeatures are the unit of acquisition; subfeature columns exist only
// inside panels. groups[k] lists the subfeature columns of superfeature k.
struct SuperfeatureMap {
  std::vector<std::vector<int>> groups;
  std::vector<bool> free_set;  // free_set[k]: zero acquisition cost

  int num_super() const { return static_cast<int>(groups.size()); }
  int num_sub() const;
  bool is_free(int k) const { return free_set[k]; }
  int super_of(int col) const;  // superfeature owning a subfeature column

  // Checks the partition invariant: groups cover {0..d_sub-1} exactly once.
  void validate() const;

  // Experiment default: {0:[0], 1:[1], 2:[2,3]}, free_set = {0}.
  static SuperfeatureMap experiment_default();
};

// ---------------------------------------------------------------------------
// Panels
// ---------------------------------------------------------------------------

// Ground-truth counterfactual feature matrix, rows t = 0..T.
class FullPanel {
 public:
  FullPanel() = default;
  FullPanel(int steps, int d_sub)
      : steps_(steps), d_(d_sub), values_(static_cast<size_t>(steps + 1) * d_sub, 0.0) {}

  int steps() const { return steps_; }      // T
  int cols() const { return d_; }           // d_sub
  double operator()(int t, int j) const { return values_[idx(t, j)]; }
  double& operator()(int t, int j) { return values_[idx(t, j)]; }

  bool all_finite() const;

 private:
  size_t idx(int t, int j) const { return static_cast<size_t>(t) * d_ + j; }
  int steps_ = 0, d_ = 0;
  std::vector<double> values_;
};

// Masked observation of a FullPanel. Missing cells are explicit empties,
// never sentinel floats.
class ObservedPanel {
 public:
  using Cell = std::optional<double>;

  ObservedPanel() = default;
  ObservedPanel(int steps, int d_sub)
      : steps_(steps), d_(d_sub), cells_(static_cast<size_t>(steps + 1) * d_sub) {}

  int steps() const { return steps_; }
  int cols() const { return d_; }
  const Cell& cell(int t, int j) const { return cells_[idx(t, j)]; }
  void set(int t, int j, double v) { cells_[idx(t, j)] = v; }
  void clear(int t, int j) { cells_[idx(t, j)].reset(); }
  bool observed(int t, int j) const { return cells_[idx(t, j)].has_value(); }
  double value_or(int t, int j, double fallback) const {
    const auto& c = cells_[idx(t, j)];
    return c ? *c : fallback;
  }

  int missing_count() const;

 private:
  size_t idx(int t, int j) const { return static_cast<size_t>(t) * d_ + j; }
  int steps_ = 0, d_ = 0;
  std::vector<Cell> cells_;
};

// Observation function G_A: reveals full(t,j) iff the superfeature of j was
// acquired at step t; row 0 is always fully observed.
ObservedPanel apply_mask(const FullPanel& full, const MaskTrajectory& masks,
                         const SuperfeatureMap& map);

using LabelSeq = std::vector<std::uint8_t>;  // Y^t for t = 1..T, entries 0/1

// ---------------------------------------------------------------------------
// Costs
// ---------------------------------------------------------------------------

struct CostSpec {
  std::vector<double> c_acq;  // per superfeature, >= 0; 0 on the free set
  double c_mc = 12.0;

  void validate(const SuperfeatureMap& map) const;
  static CostSpec experiment_default();  // c_acq = [0,1,1], c_mc = 12
};

// Acquisition part of a step cost: sum_k c_acq[k] * a'_k.
double acquisition_cost(const StepMask& a_prime, const CostSpec& costs);

// ---------------------------------------------------------------------------
// Records and datasets
// ---------------------------------------------------------------------------

struct Record {
  long long id = 0;
  ObservedPanel observed;
  MaskTrajectory masks;
  LabelSeq labels;
  std::optional<FullPanel> truth;

  // observed must equal apply_mask(truth, masks) on Real cells.
  void validate(const SuperfeatureMap& map) const;

  bool complete_case() const;          // every mask all-ones
  bool complete_through(int t) const;  // masks 1..t all-ones
};

enum class Split { Train, Nuisance, Test };

struct SplitFractions {
  double train = 0.30;
  double nuisance = 0.30;
  // test gets the remainder (default 0.40)
};

struct Dataset {
  std::vector<Record> records;
  SuperfeatureMap map;
  int steps = 0;  // T
  SplitFractions split;

  int n() const { return static_cast<int>(records.size()); }

  // Contiguous split ranges [begin, end) over record indices.
  std::pair<int, int> split_range(Split s) const;
  std::vector<int> split_indices(Split s) const;
};

}  // namespace afape
