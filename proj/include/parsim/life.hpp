#pragma once

// Cellular-automaton benchmark on an L x L periodic lattice.
//
// Rule: s = cell + its four orthogonal neighbours; the next cell is live iff
// s is 2, 4 or 5. Cells update simultaneously from the previous state.
//
// Two drivers share the stencil kernel: a serial reference and a geometric
// decomposition that runs one OpenMP thread per subgrid, exchanging one-cell
// halos through per-subgrid message buffers. Both start from the same
// globally generated grid and produce bit-identical results.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace parsim::life {

using Cell = std::uint8_t;

struct ProcessGrid {
  int rows = 1;
  int cols = 1;

  int size() const noexcept { return rows * cols; }
  friend bool operator==(const ProcessGrid&, const ProcessGrid&) = default;
};

/// Parses "RxC".
ProcessGrid parse_dims(const std::string& text);

struct LifeConfig {
  std::int64_t L = 64;
  double rho = 0.49;
  std::uint64_t seed = 1234;
  std::int64_t maxstep = 100;
  std::int64_t printfreq = 10;
  ProcessGrid dims;

  /// Throws ValidationError. Divisibility is only required for parallel runs.
  void validate(bool parallel) const;
};

/// Interior of rows x cols cells surrounded by a one-cell ghost frame.
/// Index range for at() is [-1, rows] x [-1, cols].
class LifeGrid {
 public:
  LifeGrid() = default;
  LifeGrid(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t stride() const noexcept { return cols_ + 2; }

  Cell& at(std::ptrdiff_t i, std::ptrdiff_t j) noexcept {
    return cells_[static_cast<std::size_t>(i + 1) * stride() + static_cast<std::size_t>(j + 1)];
  }
  Cell at(std::ptrdiff_t i, std::ptrdiff_t j) const noexcept {
    return cells_[static_cast<std::size_t>(i + 1) * stride() + static_cast<std::size_t>(j + 1)];
  }

  std::int64_t live_count() const noexcept;

  /// Serial ghost update: the frame becomes the periodic wrap of the interior.
  void wrap_ghosts() noexcept;

  /// Interiors equal (ghost frames ignored).
  bool same_interior(const LifeGrid& other) const noexcept;

  std::span<Cell> raw() noexcept { return cells_; }
  std::span<const Cell> raw() const noexcept { return cells_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Cell> cells_;
};

/// Global L x L grid: cell (i, j) is live iff the next splitmix64 draw, taken
/// in row-major order from a stream seeded with cfg.seed, is below rho * 2^64.
LifeGrid init_grid(const LifeConfig& cfg);

/// Applies the rule to every interior cell of `in` (whose ghosts must be
/// current) and writes the interior of `out`. Returns the new live count.
std::int64_t step(const LifeGrid& in, LifeGrid& out) noexcept;

// ---------------------------------------------------------------------------
// Decomposition

/// Edge cells a subgrid sends to its eight periodic neighbours.
struct Halo {
  std::vector<Cell> top, bottom, left, right;
  Cell top_left = 0, top_right = 0, bottom_left = 0, bottom_right = 0;
};

void pack_edges(const LifeGrid& g, Halo& out);

/// Neighbour halos indexed by direction.
struct NeighbourHalos {
  const Halo* up;
  const Halo* down;
  const Halo* left;
  const Halo* right;
  const Halo* up_left;
  const Halo* up_right;
  const Halo* down_left;
  const Halo* down_right;
};

void unpack_halos(LifeGrid& g, const NeighbourHalos& n);

/// Row-major rank of block (r, c) and its periodic neighbours.
int rank_of(ProcessGrid dims, int r, int c) noexcept;
NeighbourHalos neighbours(ProcessGrid dims, int rank, const std::vector<Halo>& halos);

std::vector<LifeGrid> scatter(const LifeGrid& global, ProcessGrid dims);
LifeGrid gather(const std::vector<LifeGrid>& blocks, ProcessGrid dims);

/// Refreshes every subgrid's ghost frame from its neighbours. Throws
/// ValidationError when the block count or shapes do not match dims.
void exchange_halos(std::vector<LifeGrid>& blocks, ProcessGrid dims);

// ---------------------------------------------------------------------------
// Drivers

enum class Mode { serial, parallel };

struct LifeResult {
  LifeGrid final_grid;
  std::int64_t initial_live = 0;
  std::vector<std::int64_t> live_history;  // one entry per executed step
  bool terminated_early = false;
  double seconds = 0.0;  // step loop only
  double seconds_per_iteration = 0.0;
};

/// Progress lines `step=<k> live=<n>` go to `progress` when non-null.
LifeResult run_life(const LifeConfig& cfg, Mode mode, std::ostream* progress = nullptr);

/// True when the population left [0.75, 1.33] x initial.
bool population_out_of_band(std::int64_t live, std::int64_t initial_live) noexcept;

/// First line `<L> <L>`, then one row of space-separated 0/1 per line.
void write_grid(const LifeGrid& g, std::ostream& out);
void write_grid_file(const LifeGrid& g, const std::string& path);
LifeGrid read_grid(std::istream& in);

}  // namespace parsim::life
