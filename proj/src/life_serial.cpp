#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "parsim/errors.hpp"
#include "parsim/hash.hpp"
#include "parsim/life.hpp"

namespace parsim::life {

ProcessGrid parse_dims(const std::string& text) {
  const auto x = text.find_first_of("xX");
  if (x == std::string::npos) throw ValidationError("dims must look like RxC, got '" + text + "'");
  try {
    std::size_t used_r = 0;
    std::size_t used_c = 0;
    const std::string rs = text.substr(0, x);
    const std::string cs = text.substr(x + 1);
    ProcessGrid d{std::stoi(rs, &used_r), std::stoi(cs, &used_c)};
    if (used_r != rs.size() || used_c != cs.size()) throw std::invalid_argument("trailing");
    if (d.rows < 1 || d.cols < 1) throw ValidationError("dims must be positive");
    return d;
  } catch (const std::logic_error&) {
    throw ValidationError("dims must look like RxC, got '" + text + "'");
  }
}

void LifeConfig::validate(bool parallel) const {
  if (L < 1) throw ValidationError("L must be >= 1");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in [0, 1]");
  if (maxstep < 0) throw ValidationError("maxstep must be >= 0");
  if (printfreq < 1) throw ValidationError("printfreq must be >= 1");
  if (dims.rows < 1 || dims.cols < 1) throw ValidationError("dims must be positive");
  if (parallel && (L % dims.rows != 0 || L % dims.cols != 0)) {
    throw ValidationError("L=" + std::to_string(L) + " is not divisible by dims " +
                          std::to_string(dims.rows) + "x" + std::to_string(dims.cols));
  }
}

LifeGrid::LifeGrid(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), cells_((rows + 2) * (cols + 2), 0) {}

std::int64_t LifeGrid::live_count() const noexcept {
  std::int64_t n = 0;
  for (std::size_t i = 0; i < rows_; ++i) {
    const Cell* row = &cells_[(i + 1) * stride() + 1];
    for (std::size_t j = 0; j < cols_; ++j) n += row[j];
  }
  return n;
}

void LifeGrid::wrap_ghosts() noexcept {
  const auto r = static_cast<std::ptrdiff_t>(rows_);
  const auto c = static_cast<std::ptrdiff_t>(cols_);
  for (std::ptrdiff_t j = 0; j < c; ++j) {
    at(-1, j) = at(r - 1, j);
    at(r, j) = at(0, j);
  }
  for (std::ptrdiff_t i = 0; i < r; ++i) {
    at(i, -1) = at(i, c - 1);
    at(i, c) = at(i, 0);
  }
  at(-1, -1) = at(r - 1, c - 1);
  at(-1, c) = at(r - 1, 0);
  at(r, -1) = at(0, c - 1);
  at(r, c) = at(0, 0);
}

bool LifeGrid::same_interior(const LifeGrid& other) const noexcept {
  if (rows_ != other.rows_ || cols_ != other.cols_) return false;
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t j = 0; j < cols_; ++j) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const auto jj = static_cast<std::ptrdiff_t>(j);
      if (at(ii, jj) != other.at(ii, jj)) return false;
    }
  }
  return true;
}

LifeGrid init_grid(const LifeConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.L);
  LifeGrid g(n, n);
  SplitMix64 rng(cfg.seed);
  const bool all = cfg.rho >= 1.0;
  const auto threshold = all ? 0ULL : static_cast<std::uint64_t>(std::ldexp(cfg.rho, 64));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::uint64_t draw = rng.next();
      g.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)) =
          (all || draw < threshold) ? 1 : 0;
    }
  }
  return g;
}

std::int64_t step(const LifeGrid& in, LifeGrid& out) noexcept {
  // Bit s of the mask is set when a sum of s produces a live cell.
  constexpr unsigned kBirthMask = (1U << 2) | (1U << 4) | (1U << 5);
  const std::size_t stride = in.stride();
  const Cell* src = in.raw().data();
  Cell* dst = out.raw().data();
  std::int64_t live = 0;
  for (std::size_t i = 1; i <= in.rows(); ++i) {
    const Cell* up = src + (i - 1) * stride;
    const Cell* mid = src + i * stride;
    const Cell* down = src + (i + 1) * stride;
    Cell* o = dst + i * stride;
    std::int64_t row_live = 0;
    for (std::size_t j = 1; j <= in.cols(); ++j) {
      const unsigned s = mid[j] + mid[j - 1] + mid[j + 1] + up[j] + down[j];
      const Cell v = static_cast<Cell>((kBirthMask >> s) & 1U);
      o[j] = v;
      row_live += v;
    }
    live += row_live;
  }
  return live;
}

bool population_out_of_band(std::int64_t live, std::int64_t initial_live) noexcept {
  const auto l = static_cast<double>(live);
  const auto init = static_cast<double>(initial_live);
  return l < 0.75 * init || l > 1.33 * init;
}

namespace {

LifeResult run_serial(const LifeConfig& cfg, std::ostream* progress) {
  LifeResult result;
  LifeGrid grid = init_grid(cfg);
  LifeGrid next(grid.rows(), grid.cols());
  result.initial_live = grid.live_count();

  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t s = 1; s <= cfg.maxstep; ++s) {
    grid.wrap_ghosts();
    const std::int64_t live = step(grid, next);
    std::swap(grid, next);
    result.live_history.push_back(live);
    if (progress != nullptr && s % cfg.printfreq == 0) {
      *progress << "step=" << s << " live=" << live << '\n';
    }
    if (population_out_of_band(live, result.initial_live)) {
      result.terminated_early = true;
      break;
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.final_grid = std::move(grid);
  return result;
}

}  // namespace

LifeResult run_parallel(const LifeConfig& cfg, std::ostream* progress);  // life_parallel.cpp

LifeResult run_life(const LifeConfig& cfg, Mode mode, std::ostream* progress) {
  cfg.validate(mode == Mode::parallel);
  LifeResult r = mode == Mode::serial ? run_serial(cfg, progress) : run_parallel(cfg, progress);
  if (progress != nullptr && r.terminated_early) {
    *progress << "terminated at step " << r.live_history.size()
              << ": population left the [0.75, 1.33] band around " << r.initial_live << '\n';
  }
  if (!r.live_history.empty()) {
    r.seconds_per_iteration = r.seconds / static_cast<double>(r.live_history.size());
  }
  return r;
}

void write_grid(const LifeGrid& g, std::ostream& out) {
  out << g.rows() << ' ' << g.cols() << '\n';
  std::string line;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    line.clear();
    for (std::size_t j = 0; j < g.cols(); ++j) {
      if (j > 0) line.push_back(' ');
      line.push_back(g.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)) ? '1'
                                                                                          : '0');
    }
    out << line << '\n';
  }
}

void write_grid_file(const LifeGrid& g, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_grid(g, out);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

LifeGrid read_grid(std::istream& in) {
  std::size_t rows = 0;
  std::size_t cols = 0;
  if (!(in >> rows >> cols)) throw ParseError(1, "expected '<rows> <cols>'");
  LifeGrid g(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      int v = 0;
      if (!(in >> v) || (v != 0 && v != 1)) throw ParseError(i + 2, "expected 0 or 1");
      g.at(static_cast<std::ptrdiff_t>(i), static_cast<std::ptrdiff_t>(j)) = static_cast<Cell>(v);
    }
  }
  return g;
}

}  // namespace parsim::life
