// Copyright (c) 2026, The evomon Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "evomon/embedding/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include <Eigen/Dense>

#include "evomon/common/error.hpp"
#include "evomon/common/hash.hpp"
#include "evomon/common/log.hpp"
#include "evomon/common/rng.hpp"

namespace evomon::embedding {

namespace {

constexpr double kInitJitter = 1e-3;
constexpr std::size_t kUnmatchedNeighbors = 5;

// Optimisation state of one band.
struct BandState {
  std::vector<std::string> ids;
  AffinityMatrix p;
  std::vector<Point2> pos;
  std::vector<Point2> vel;
  double center = 0.0;
  // Link to the previous band (index into the previous state's points, or -1).
  std::vector<std::ptrdiff_t> match;
  std::size_t matched = 0;
};

// Frozen band the first optimised state is aligned against (progressive mode).
struct Anchor {
  std::vector<Point2> pos;
};

void require_embeddable(const FeatureMatrix& x, const EmbeddingConfig& config) {
  x.validate();
  if (x.rows() < 3) {
    throw ValidationError("snapshot '" + x.source_name() + "' has " + std::to_string(x.rows()) +
                          " instances; at least 3 are required");
  }
  if (!(config.perplexity < static_cast<double>(x.rows()))) {
    throw ConfigError("perplexity " + std::to_string(config.perplexity) + " must be smaller than the snapshot size " +
                      std::to_string(x.rows()));
  }
}

double clamp_to_band(double x, double center, double half_width) {
  return std::clamp(x, center - half_width, center + half_width);
}

// First two principal-component score vectors, sign-fixed so the entry of
// largest magnitude is positive.
std::pair<std::vector<double>, std::vector<double>> principal_scores(const FeatureMatrix& x) {
  const auto n = static_cast<Eigen::Index>(x.rows());
  const auto d = static_cast<Eigen::Index>(x.dims());

  bool all_identical = true;
  for (std::size_t i = 1; i < x.rows() && all_identical; ++i) {
    all_identical = std::equal(x.row(i).begin(), x.row(i).end(), x.row(0).begin());
  }
  if (all_identical) throw ValidationError("degenerate snapshot: all points are identical");

  Eigen::MatrixXd centered(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) centered(i, j) = x.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  centered.rowwise() -= centered.colwise().mean();

  Eigen::MatrixXd scores(n, 2);
  scores.setZero();
  if (d <= n) {
    const Eigen::MatrixXd cov = centered.transpose() * centered;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
    const auto& vecs = solver.eigenvectors();
    scores.col(0) = centered * vecs.col(d - 1);
    if (d >= 2) scores.col(1) = centered * vecs.col(d - 2);
  } else {
    const Eigen::MatrixXd gram = centered * centered.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
    if (solver.info() != Eigen::Success) throw NumericalError("PCA eigendecomposition failed");
    const auto& vals = solver.eigenvalues();
    const auto& vecs = solver.eigenvectors();
    scores.col(0) = vecs.col(n - 1) * std::sqrt(std::max(0.0, vals(n - 1)));
    scores.col(1) = vecs.col(n - 2) * std::sqrt(std::max(0.0, vals(n - 2)));
  }

  auto to_vector = [&](Eigen::Index c) {
    std::vector<double> v(static_cast<std::size_t>(n));
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      v[static_cast<std::size_t>(i)] = scores(i, c);
      if (std::abs(scores(i, c)) > std::abs(scores(arg, c))) arg = i;
    }
    if (scores(arg, c) < 0.0)
      for (double& s : v) s = -s;
    return v;
  };
  return {to_vector(0), to_vector(1)};
}

double population_std(const std::vector<double>& v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double s : v) ss += (s - mean) * (s - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

std::vector<Point2> pca_initialization(const FeatureMatrix& x, const EmbeddingConfig& config) {
  auto [first, second] = principal_scores(x);
  const double sd1 = population_std(first);
  if (!(sd1 > 0.0) || !std::isfinite(sd1)) throw ValidationError("degenerate snapshot: zero variance");
  const double sd2 = population_std(second);
  const double center = config.band_center(0);
  const double half = 0.5 * config.band_width;
  const double x_scale = (sd2 > 1e-12 * sd1) ? (config.band_width / 8.0) / sd2 : 0.0;

  std::vector<Point2> pos(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    pos[i].y = first[i] / sd1;
    pos[i].x = clamp_to_band(center + second[i] * x_scale, center, half);
  }
  return pos;
}

BandState make_state(const FeatureMatrix& x, const SquareMatrix& sq_dists, const EmbeddingConfig& config,
                     std::size_t band) {
  BandState s;
  s.ids = x.instance_ids();
  s.p = symmetrize(conditional_affinities(sq_dists, config.perplexity));
  s.center = config.band_center(band);
  s.vel.assign(x.rows(), Point2{});
  return s;
}

// Places band `band` next to an already positioned previous band.
void initialize_from_previous(BandState& state, const SquareMatrix& sq_dists, const BandLayout& previous,
                              const EmbeddingConfig& config, std::size_t band) {
  state.match = match_instances(state.ids, previous);
  const std::size_t n = state.ids.size();
  state.matched = static_cast<std::size_t>(std::count_if(state.match.begin(), state.match.end(),
                                                         [](std::ptrdiff_t m) { return m >= 0; }));
  const double half = 0.5 * config.band_width;

  std::vector<std::size_t> matched_rows;
  for (std::size_t i = 0; i < n; ++i)
    if (state.match[i] >= 0) matched_rows.push_back(i);

  state.pos.assign(n, Point2{});
  for (std::size_t i = 0; i < n; ++i) {
    if (state.match[i] >= 0) {
      const auto& prev = previous.points[static_cast<std::size_t>(state.match[i])];
      state.pos[i] = {state.center + (prev.x - previous.center), prev.y};
      continue;
    }
    state.pos[i].x = state.center;
    if (matched_rows.empty()) continue;
    // Nearest matched neighbours in feature space; ties broken by instance_id.
    std::vector<std::size_t> candidates = matched_rows;
    const std::size_t k = std::min(kUnmatchedNeighbors, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(k), candidates.end(),
                      [&](std::size_t a, std::size_t b) {
                        const double da = sq_dists(i, a);
                        const double db = sq_dists(i, b);
                        if (da != db) return da < db;
                        return state.ids[a] < state.ids[b];
                      });
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      sum += previous.points[static_cast<std::size_t>(state.match[candidates[c]])].y;
    }
    state.pos[i].y = sum / static_cast<double>(k);
  }

  Rng rng(config.seed, band);
  for (auto& p : state.pos) {
    p.x = clamp_to_band(p.x + kInitJitter * rng.normal(), state.center, half);
    p.y += kInitJitter * rng.normal();
  }
  if (state.matched == 0) {
    log_warning("alignment coverage: band " + std::to_string(band) + " shares no instance with band " +
                std::to_string(band - 1));
  }
}

BandLayout to_band(const BandState& s, std::size_t band, std::int64_t training_iteration) {
  BandLayout out;
  out.index = band;
  out.center = s.center;
  out.training_iteration = training_iteration;
  out.points.reserve(s.ids.size());
  for (std::size_t i = 0; i < s.ids.size(); ++i) out.points.push_back({s.ids[i], s.pos[i].x, s.pos[i].y});
  return out;
}

double alignment_weight(const EmbeddingConfig& config, std::size_t matched) {
  if (matched == 0) return 0.0;
  return 2.0 * config.learning_rate * config.lambda_align / static_cast<double>(matched);
}

// A chain is the sequence of (band, row) slots one instance occupies in
// consecutive linked bands.
struct Chain {
  std::vector<std::pair<std::size_t, std::size_t>> slots;
};

std::vector<Chain> build_chains(const std::vector<BandState>& states) {
  // next[k][i]: row in band k+1 linked to row i of band k.
  std::vector<std::vector<std::ptrdiff_t>> next(states.size());
  for (std::size_t k = 0; k < states.size(); ++k) next[k].assign(states[k].ids.size(), -1);
  for (std::size_t k = 1; k < states.size(); ++k) {
    for (std::size_t j = 0; j < states[k].match.size(); ++j) {
      if (states[k].match[j] >= 0) next[k - 1][static_cast<std::size_t>(states[k].match[j])] = static_cast<std::ptrdiff_t>(j);
    }
  }
  std::vector<Chain> chains;
  for (std::size_t k = 0; k < states.size(); ++k) {
    for (std::size_t i = 0; i < states[k].ids.size(); ++i) {
      const bool linked_back = k > 0 && states[k].match[i] >= 0;
      if (linked_back) continue;
      Chain c;
      std::size_t band = k;
      std::size_t row = i;
      c.slots.emplace_back(band, row);
      while (band + 1 < states.size() && next[band][row] >= 0) {
        row = static_cast<std::size_t>(next[band][row]);
        ++band;
        c.slots.emplace_back(band, row);
      }
      if (c.slots.size() > 1) chains.push_back(std::move(c));
    }
  }
  return chains;
}

// Proximal step of the chained alignment penalty: replaces z (passed in y) by the
// minimiser of sum_t (y_t - z_t)^2 / 2 + sum_{t>0} a_t (y_t - y_{t-1})^2 / 2.
// Tridiagonal, diagonally dominant; solved with the Thomas algorithm.
void solve_chain(std::vector<double>& y, const std::vector<double>& a) {
  const std::size_t m = y.size();
  std::vector<double> c_prime(m, 0.0);
  std::vector<double> d_prime(m, 0.0);
  for (std::size_t t = 0; t < m; ++t) {
    const double lower = t > 0 ? -a[t] : 0.0;
    const double upper = t + 1 < m ? -a[t + 1] : 0.0;
    const double diag = 1.0 + (t > 0 ? a[t] : 0.0) + (t + 1 < m ? a[t + 1] : 0.0);
    const double denom = diag - (t > 0 ? lower * c_prime[t - 1] : 0.0);
    c_prime[t] = upper / denom;
    d_prime[t] = (y[t] - (t > 0 ? lower * d_prime[t - 1] : 0.0)) / denom;
  }
  y[m - 1] = d_prime[m - 1];
  for (std::size_t t = m - 1; t-- > 0;) y[t] = d_prime[t] - c_prime[t] * y[t + 1];
}

double objective(const std::vector<BandState>& states, const Anchor* anchor, const EmbeddingConfig& config) {
  double total = 0.0;
  for (std::size_t k = 0; k < states.size(); ++k) {
    total += kl_cost(states[k].p, states[k].pos);
    if (k == 0 && anchor == nullptr) continue;
    std::span<const Point2> prev = (k == 0) ? std::span<const Point2>(anchor->pos) : std::span<const Point2>(states[k - 1].pos);
    total += alignment_gradient(states[k].pos, states[k].match, prev, config.lambda_align).penalty;
  }
  return total;
}

/**
 * Momentum descent on the sum of band KL costs plus chained alignment.
 *
 * Each step takes the explicit momentum step on the t-SNE gradient, then the
 * proximal step of the alignment penalty on y (closed form for a frozen anchor,
 * a tridiagonal solve for chains of free bands), then clamps x into the band.
 * The velocity carried to the next step is the realised displacement.
 */
void optimize(std::vector<BandState>& states, const Anchor* anchor, const EmbeddingConfig& config,
              OptimizationTrace* trace) {
  const double half = 0.5 * config.band_width;
  const double eta = config.learning_rate;
  const std::vector<Chain> chains = build_chains(states);
  std::vector<double> weights(states.size(), 0.0);
  for (std::size_t k = 0; k < states.size(); ++k) weights[k] = alignment_weight(config, states[k].matched);

  if (trace) trace->cost.push_back(objective(states, anchor, config));

  std::vector<std::vector<Point2>> old(states.size());
  std::vector<double> chain_y;
  std::vector<double> chain_a;
  for (int step = 0; step < config.steps; ++step) {
    const double exaggeration = step < config.early_exaggeration_steps ? config.early_exaggeration_factor : 1.0;
    const double momentum = step < config.momentum_switch_step ? config.momentum_early : config.momentum_late;

    for (std::size_t k = 0; k < states.size(); ++k) {
      auto& s = states[k];
      const auto grad = tsne_gradient(s.p, s.pos, exaggeration);
      old[k] = s.pos;
      for (std::size_t i = 0; i < s.pos.size(); ++i) {
        s.pos[i].x += momentum * s.vel[i].x - eta * grad[i].x;
        s.pos[i].y += momentum * s.vel[i].y - eta * grad[i].y;
      }
    }

    if (anchor != nullptr && weights[0] > 0.0) {
      auto& s = states[0];
      const double a = weights[0];
      for (std::size_t i = 0; i < s.pos.size(); ++i) {
        if (s.match[i] < 0) continue;
        s.pos[i].y = (s.pos[i].y + a * anchor->pos[static_cast<std::size_t>(s.match[i])].y) / (1.0 + a);
      }
    }
    for (const auto& chain : chains) {
      const std::size_t m = chain.slots.size();
      chain_y.resize(m);
      chain_a.assign(m, 0.0);
      for (std::size_t t = 0; t < m; ++t) {
        const auto [band, row] = chain.slots[t];
        chain_y[t] = states[band].pos[row].y;
        if (t > 0) chain_a[t] = weights[band];
      }
      solve_chain(chain_y, chain_a);
      for (std::size_t t = 0; t < m; ++t) {
        const auto [band, row] = chain.slots[t];
        states[band].pos[row].y = chain_y[t];
      }
    }

    for (std::size_t k = 0; k < states.size(); ++k) {
      auto& s = states[k];
      for (std::size_t i = 0; i < s.pos.size(); ++i) {
        s.pos[i].x = clamp_to_band(s.pos[i].x, s.center, half);
        s.vel[i] = {s.pos[i].x - old[k][i].x, s.pos[i].y - old[k][i].y};
      }
    }
    if (trace) trace->cost.push_back(objective(states, anchor, config));
  }
}

void finalize(EvolutionLayout& layout) { layout.config_hash = compute_config_hash(layout.config, layout.bands); }

}  // namespace

std::vector<std::ptrdiff_t> match_instances(std::span<const std::string> current, const BandLayout& previous) {
  std::unordered_map<std::string_view, std::ptrdiff_t> index;
  index.reserve(previous.points.size());
  for (std::size_t j = 0; j < previous.points.size(); ++j) {
    index.emplace(previous.points[j].instance_id, static_cast<std::ptrdiff_t>(j));
  }
  std::vector<std::ptrdiff_t> match(current.size(), -1);
  for (std::size_t i = 0; i < current.size(); ++i) {
    if (auto it = index.find(current[i]); it != index.end()) match[i] = it->second;
  }
  return match;
}

AlignmentTerm alignment_gradient(std::span<const Point2> y, std::span<const std::ptrdiff_t> match,
                                 std::span<const Point2> previous, double lambda_align) {
  if (match.size() != y.size()) throw ValidationError("alignment: match vector does not cover every point");
  AlignmentTerm term;
  term.gradient.assign(y.size(), Point2{});
  for (auto m : match) term.matched += m >= 0 ? 1 : 0;
  if (term.matched == 0) {
    log_warning("alignment coverage: no instance matches the previous band");
    return term;
  }
  const double scale = lambda_align / static_cast<double>(term.matched);
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (match[i] < 0) continue;
    const double dy = y[i].y - previous[static_cast<std::size_t>(match[i])].y;
    term.penalty += scale * dy * dy;
    term.gradient[i].y = 2.0 * scale * dy;
  }
  return term;
}

std::string compute_config_hash(const EmbeddingConfig& config, std::span<const BandLayout> bands) {
  Fnv1a64 h;
  h.update(config.canonical());
  for (const auto& band : bands) {
    h.update("|band=" + std::to_string(band.index) + ";iter=" + std::to_string(band.training_iteration) + ";ids=");
    for (const auto& p : band.points) {
      h.update(p.instance_id);
      h.update(",");
    }
  }
  return h.hex();
}

EvolutionLayout embed_first(const FeatureMatrix& x0, const EmbeddingConfig& config, std::int64_t training_iteration,
                            OptimizationTrace* trace) {
  config.validate();
  require_embeddable(x0, config);

  std::vector<BandState> states;
  states.push_back(make_state(x0, pairwise_sq_dists(x0), config, 0));
  states[0].pos = pca_initialization(x0, config);
  optimize(states, nullptr, config, trace);

  EvolutionLayout layout;
  layout.config = config;
  layout.bands.push_back(to_band(states[0], 0, training_iteration));
  layout.frozen_upto = config.mode == Mode::progressive ? 0 : -1;
  finalize(layout);
  return layout;
}

EvolutionLayout append_iteration(const EvolutionLayout& layout, const FeatureMatrix& x, const EmbeddingConfig& config,
                                 std::int64_t training_iteration, OptimizationTrace* trace) {
  if (layout.bands.empty()) throw ValidationError("append_iteration: layout has no bands; use embed_first");
  if (!(config == layout.config)) throw ConfigError("append_iteration: config differs from the layout's config");
  config.validate();
  require_embeddable(x, config);

  const BandLayout& previous = layout.bands.back();
  const std::size_t band = layout.bands.size();
  const SquareMatrix sq_dists = pairwise_sq_dists(x);

  std::vector<BandState> states;
  states.push_back(make_state(x, sq_dists, config, band));
  initialize_from_previous(states[0], sq_dists, previous, config, band);

  Anchor anchor;
  anchor.pos.reserve(previous.points.size());
  for (const auto& p : previous.points) anchor.pos.push_back({p.x, p.y});
  optimize(states, &anchor, config, trace);

  EvolutionLayout out = layout;
  out.bands.push_back(to_band(states[0], band, training_iteration));
  out.frozen_upto = static_cast<std::int64_t>(band);
  finalize(out);
  return out;
}

EvolutionLayout batch_embed(std::span<const FeatureMatrix> snapshots, const EmbeddingConfig& config,
                            std::span<const std::int64_t> training_iterations, OptimizationTrace* trace) {
  if (snapshots.empty()) throw ValidationError("batch_embed: at least one snapshot is required");
  if (!training_iterations.empty() && training_iterations.size() != snapshots.size()) {
    throw ValidationError("batch_embed: training_iterations must match the snapshot count");
  }
  auto iteration_of = [&](std::size_t k) {
    return training_iterations.empty() ? static_cast<std::int64_t>(k) : training_iterations[k];
  };
  config.validate();
  for (const auto& s : snapshots) require_embeddable(s, config);

  if (snapshots.size() == 1) {
    EvolutionLayout single = embed_first(snapshots[0], config, iteration_of(0), trace);
    single.frozen_upto = -1;
    return single;
  }

  // Warm start from a progressive sweep, then refine every band jointly.
  EvolutionLayout sweep = embed_first(snapshots[0], config, iteration_of(0));
  for (std::size_t k = 1; k < snapshots.size(); ++k)
    sweep = append_iteration(sweep, snapshots[k], config, iteration_of(k));

  std::vector<BandState> states;
  states.reserve(snapshots.size());
  for (std::size_t k = 0; k < snapshots.size(); ++k) {
    const SquareMatrix sq_dists = pairwise_sq_dists(snapshots[k]);
    states.push_back(make_state(snapshots[k], sq_dists, config, k));
    if (k > 0) initialize_from_previous(states[k], sq_dists, sweep.bands[k - 1], config, k);
    const auto& band = sweep.bands[k];
    states[k].pos.assign(band.points.size(), Point2{});
    for (std::size_t i = 0; i < band.points.size(); ++i) states[k].pos[i] = {band.points[i].x, band.points[i].y};
  }
  EmbeddingConfig refine = config;
  refine.early_exaggeration_steps = 0;
  refine.momentum_switch_step = 0;
  optimize(states, nullptr, refine, trace);

  double mean_y0 = 0.0;
  for (const auto& p : states[0].pos) mean_y0 += p.y;
  mean_y0 /= static_cast<double>(states[0].pos.size());
  for (auto& s : states)
    for (auto& p : s.pos) p.y -= mean_y0;

  EvolutionLayout layout;
  layout.config = config;
  for (std::size_t k = 0; k < states.size(); ++k) layout.bands.push_back(to_band(states[k], k, iteration_of(k)));
  layout.frozen_upto = -1;
  finalize(layout);
  return layout;
}

double evolution_cost(const EvolutionLayout& layout, std::span<const FeatureMatrix> snapshots) {
  if (snapshots.size() != layout.bands.size()) throw ValidationError("evolution_cost: one snapshot per band required");
  double total = 0.0;
  for (std::size_t k = 0; k < layout.bands.size(); ++k) {
    const auto& band = layout.bands[k];
    const AffinityMatrix p = joint_affinities(snapshots[k], layout.config.perplexity);
    std::vector<Point2> y;
    std::vector<std::string> ids;
    for (const auto& pt : band.points) {
      y.push_back({pt.x, pt.y});
      ids.push_back(pt.instance_id);
    }
    if (ids != snapshots[k].instance_ids()) throw ValidationError("evolution_cost: band and snapshot rows differ");
    total += kl_cost(p, y);
    if (k == 0) continue;
    const auto& prev_band = layout.bands[k - 1];
    std::vector<Point2> prev;
    for (const auto& pt : prev_band.points) prev.push_back({pt.x, pt.y});
    total += alignment_gradient(y, match_instances(ids, prev_band), prev, layout.config.lambda_align).penalty;
  }
  return total;
}

}  // namespace evomon::embedding
