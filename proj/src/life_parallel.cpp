#include <omp.h>

#include <chrono>
#include <ostream>

#include "parsim/errors.hpp"
#include "parsim/life.hpp"

namespace parsim::life {

namespace {

std::ptrdiff_t sz(std::size_t v) { return static_cast<std::ptrdiff_t>(v); }

int wrap(int v, int n) noexcept { return ((v % n) + n) % n; }

}  // namespace

void pack_edges(const LifeGrid& g, Halo& out) {
  const auto r = sz(g.rows());
  const auto c = sz(g.cols());
  out.top.resize(g.cols());
  out.bottom.resize(g.cols());
  out.left.resize(g.rows());
  out.right.resize(g.rows());
  for (std::ptrdiff_t j = 0; j < c; ++j) {
    out.top[j] = g.at(0, j);
    out.bottom[j] = g.at(r - 1, j);
  }
  for (std::ptrdiff_t i = 0; i < r; ++i) {
    out.left[i] = g.at(i, 0);
    out.right[i] = g.at(i, c - 1);
  }
  out.top_left = g.at(0, 0);
  out.top_right = g.at(0, c - 1);
  out.bottom_left = g.at(r - 1, 0);
  out.bottom_right = g.at(r - 1, c - 1);
}

void unpack_halos(LifeGrid& g, const NeighbourHalos& n) {
  const auto r = sz(g.rows());
  const auto c = sz(g.cols());
  for (std::ptrdiff_t j = 0; j < c; ++j) {
    g.at(-1, j) = n.up->bottom[j];
    g.at(r, j) = n.down->top[j];
  }
  for (std::ptrdiff_t i = 0; i < r; ++i) {
    g.at(i, -1) = n.left->right[i];
    g.at(i, c) = n.right->left[i];
  }
  g.at(-1, -1) = n.up_left->bottom_right;
  g.at(-1, c) = n.up_right->bottom_left;
  g.at(r, -1) = n.down_left->top_right;
  g.at(r, c) = n.down_right->top_left;
}

int rank_of(ProcessGrid dims, int r, int c) noexcept {
  return wrap(r, dims.rows) * dims.cols + wrap(c, dims.cols);
}

NeighbourHalos neighbours(ProcessGrid dims, int rank, const std::vector<Halo>& halos) {
  const int r = rank / dims.cols;
  const int c = rank % dims.cols;
  auto at = [&](int dr, int dc) { return &halos[static_cast<std::size_t>(rank_of(dims, r + dr, c + dc))]; };
  return NeighbourHalos{at(-1, 0),  at(1, 0),  at(0, -1), at(0, 1),
                        at(-1, -1), at(-1, 1), at(1, -1), at(1, 1)};
}

std::vector<LifeGrid> scatter(const LifeGrid& global, ProcessGrid dims) {
  if (dims.rows < 1 || dims.cols < 1 || global.rows() % static_cast<std::size_t>(dims.rows) != 0 ||
      global.cols() % static_cast<std::size_t>(dims.cols) != 0) {
    throw ValidationError("grid does not divide evenly over the process grid");
  }
  const std::size_t br = global.rows() / static_cast<std::size_t>(dims.rows);
  const std::size_t bc = global.cols() / static_cast<std::size_t>(dims.cols);
  std::vector<LifeGrid> blocks;
  blocks.reserve(static_cast<std::size_t>(dims.size()));
  for (int pr = 0; pr < dims.rows; ++pr) {
    for (int pc = 0; pc < dims.cols; ++pc) {
      LifeGrid b(br, bc);
      for (std::size_t i = 0; i < br; ++i) {
        for (std::size_t j = 0; j < bc; ++j) {
          b.at(sz(i), sz(j)) = global.at(sz(pr * br + i), sz(pc * bc + j));
        }
      }
      blocks.push_back(std::move(b));
    }
  }
  return blocks;
}

LifeGrid gather(const std::vector<LifeGrid>& blocks, ProcessGrid dims) {
  if (blocks.size() != static_cast<std::size_t>(dims.size()) || blocks.empty()) {
    throw ValidationError("block count does not match the process grid");
  }
  const std::size_t br = blocks[0].rows();
  const std::size_t bc = blocks[0].cols();
  LifeGrid global(br * static_cast<std::size_t>(dims.rows), bc * static_cast<std::size_t>(dims.cols));
  for (int pr = 0; pr < dims.rows; ++pr) {
    for (int pc = 0; pc < dims.cols; ++pc) {
      const LifeGrid& b = blocks[static_cast<std::size_t>(rank_of(dims, pr, pc))];
      for (std::size_t i = 0; i < br; ++i) {
        for (std::size_t j = 0; j < bc; ++j) {
          global.at(sz(pr * br + i), sz(pc * bc + j)) = b.at(sz(i), sz(j));
        }
      }
    }
  }
  return global;
}

void exchange_halos(std::vector<LifeGrid>& blocks, ProcessGrid dims) {
  if (blocks.size() != static_cast<std::size_t>(dims.size()) || blocks.empty()) {
    throw ValidationError("block count does not match the process grid");
  }
  for (const auto& b : blocks) {
    if (b.rows() != blocks[0].rows() || b.cols() != blocks[0].cols()) {
      throw ValidationError("subgrid shapes differ");
    }
  }
  std::vector<Halo> halos(blocks.size());
  for (std::size_t k = 0; k < blocks.size(); ++k) pack_edges(blocks[k], halos[k]);
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    unpack_halos(blocks[k], neighbours(dims, static_cast<int>(k), halos));
  }
}

LifeResult run_parallel(const LifeConfig& cfg, std::ostream* progress) {
  LifeResult result;
  const LifeGrid global = init_grid(cfg);
  result.initial_live = global.live_count();

  std::vector<LifeGrid> blocks = scatter(global, cfg.dims);
  std::vector<LifeGrid> next;
  next.reserve(blocks.size());
  for (const auto& b : blocks) next.emplace_back(b.rows(), b.cols());
  // Step s reads halo slot (s-1)%2 and posts into the other one.
  std::vector<Halo> posted[2] = {std::vector<Halo>(blocks.size()), std::vector<Halo>(blocks.size())};
  std::vector<NeighbourHalos> links[2];
  for (int b = 0; b < 2; ++b) {
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      links[b].push_back(neighbours(cfg.dims, static_cast<int>(k), posted[b]));
    }
  }
  std::vector<std::int64_t> local_live(blocks.size(), 0);

  const int p = cfg.dims.size();
  const std::int64_t maxstep = cfg.maxstep;
  const std::int64_t printfreq = cfg.printfreq;
  const std::int64_t initial = result.initial_live;
  bool stop = false;

  omp_set_dynamic(0);
  const auto start = std::chrono::steady_clock::now();
#pragma omp parallel num_threads(p) default(shared)
  {
#pragma omp for schedule(static, 1)
    for (int k = 0; k < p; ++k) pack_edges(blocks[k], posted[0][k]);

    for (std::int64_t s = 1; s <= maxstep; ++s) {
      const int cur = static_cast<int>((s - 1) % 2);
#pragma omp for schedule(static, 1)
      for (int k = 0; k < p; ++k) {
        unpack_halos(blocks[k], links[cur][k]);
        local_live[k] = step(blocks[k], next[k]);
        std::swap(blocks[k], next[k]);
        pack_edges(blocks[k], posted[1 - cur][k]);
      }

#pragma omp single
      {
        std::int64_t live = 0;
        for (int k = 0; k < p; ++k) live += local_live[k];
        result.live_history.push_back(live);
        if (progress != nullptr && s % printfreq == 0) {
          *progress << "step=" << s << " live=" << live << '\n';
        }
        if (population_out_of_band(live, initial)) {
          result.terminated_early = true;
          stop = true;
        }
      }
      if (stop) break;
    }
  }
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.final_grid = gather(blocks, cfg.dims);
  return result;
}

}  // namespace parsim::life
