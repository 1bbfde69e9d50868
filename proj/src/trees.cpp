// Copyright 2026 The deskaid Authors.
// SPDX-License-Identifier: Apache-2.0

// CART trees, random forests and gradient boosting.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deskaid/models.hpp"
#include "models_internal.hpp"

namespace deskaid {

namespace {

struct SplitChoice {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0;
};

double Gini(double pos, double total) {
  if (total <= 0) return 0.0;
  const double q = pos / total;
  return 1.0 - q * q - (1.0 - q) * (1.0 - q);
}

// Threshold halfway between two distinct sorted values, kept strictly below
// the upper one so the split reproduces on the training rows.
double Midpoint(double lo, double hi) {
  const double mid = lo + (hi - lo) / 2.0;
  return mid < hi ? mid : lo;
}

int AddNode(Tree& t, double value) {
  t.feature.push_back(-1);
  t.threshold.push_back(0.0);
  t.left.push_back(-1);
  t.right.push_back(-1);
  t.value.push_back(value);
  return static_cast<int>(t.size()) - 1;
}

void SortByFeature(std::vector<int>& rows, const Eigen::MatrixXd& X, int f) {
  std::sort(rows.begin(), rows.end(), [&](int a, int b) {
    const double xa = X(a, f), xb = X(b, f);
    return xa < xb || (xa == xb && a < b);
  });
}

}  // namespace

double Tree::Predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int node = 0;
  while (feature[node] >= 0) {
    node = x[feature[node]] <= threshold[node] ? left[node] : right[node];
  }
  return value[node];
}

Tree GrowClassificationTree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                            const std::vector<int>& counts, const TreeGrowth& growth,
                            Rng& rng, Eigen::VectorXd* importance) {
  const int p = static_cast<int>(X.cols());
  const int mtry = growth.mtry > 0 ? std::min(growth.mtry, p) : p;
  double total_weight = 0;
  std::vector<int> root_rows;
  for (int i = 0; i < static_cast<int>(X.rows()); ++i) {
    if (counts[i] > 0) {
      root_rows.push_back(i);
      total_weight += counts[i];
    }
  }

  Tree tree;
  struct Pending {
    int node;
    int depth;
    std::vector<int> rows;
  };
  std::vector<Pending> stack;
  auto weigh = [&](const std::vector<int>& rows, double& w, double& pos) {
    w = pos = 0;
    for (int r : rows) {
      w += counts[r];
      pos += counts[r] * y[r];
    }
  };
  {
    double w, pos;
    weigh(root_rows, w, pos);
    stack.push_back({AddNode(tree, w > 0 ? pos / w : 0.0), 0, std::move(root_rows)});
  }
  std::vector<int> order(p);
  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    double w, pos;
    weigh(cur.rows, w, pos);
    if (pos <= 0 || pos >= w) continue;  // pure
    if (growth.max_depth > 0 && cur.depth >= growth.max_depth) continue;
    if (w < 2.0 * growth.min_leaf) continue;

    const double parent = Gini(pos, w);
    std::iota(order.begin(), order.end(), 0);
    for (int k = 0; k < p; ++k) {
      std::swap(order[k], order[k + static_cast<int>(UniformIndex(rng, p - k))]);
    }
    SplitChoice best;
    best.score = std::numeric_limits<double>::infinity();
    int visited = 0;
    std::vector<int> rows = cur.rows;
    for (int k = 0; k < p && visited < mtry; ++k) {
      const int f = order[k];
      SortByFeature(rows, X, f);
      if (X(rows.front(), f) == X(rows.back(), f)) continue;  // constant here
      ++visited;
      double wl = 0, pl = 0;
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        wl += counts[rows[i]];
        pl += counts[rows[i]] * y[rows[i]];
        const double xi = X(rows[i], f), xn = X(rows[i + 1], f);
        if (xi == xn) continue;
        const double wr = w - wl;
        if (wl < growth.min_leaf || wr < growth.min_leaf) continue;
        const double score = wl * Gini(pl, wl) + wr * Gini(pos - pl, wr);
        if (score < best.score) best = {f, Midpoint(xi, xn), score};
      }
    }
    if (best.feature < 0) continue;

    std::vector<int> lrows, rrows;
    for (int r : cur.rows) (X(r, best.feature) <= best.threshold ? lrows : rrows).push_back(r);
    if (importance) (*importance)[best.feature] += (w * parent - best.score) / total_weight;
    double lw, lp, rw, rp;
    weigh(lrows, lw, lp);
    weigh(rrows, rw, rp);
    const int l = AddNode(tree, lp / lw);
    const int r = AddNode(tree, rp / rw);
    tree.feature[cur.node] = best.feature;
    tree.threshold[cur.node] = best.threshold;
    tree.left[cur.node] = l;
    tree.right[cur.node] = r;
    stack.push_back({r, cur.depth + 1, std::move(rrows)});
    stack.push_back({l, cur.depth + 1, std::move(lrows)});
  }
  return tree;
}

Tree GrowRegressionTree(const Eigen::MatrixXd& X, const Eigen::VectorXd& target,
                        int max_depth) {
  const int p = static_cast<int>(X.cols());
  Tree tree;
  struct Pending {
    int node;
    int depth;
    std::vector<int> rows;
  };
  auto mean_of = [&](const std::vector<int>& rows) {
    double s = 0;
    for (int r : rows) s += target[r];
    return s / static_cast<double>(rows.size());
  };
  std::vector<int> all(static_cast<std::size_t>(X.rows()));
  std::iota(all.begin(), all.end(), 0);
  std::vector<Pending> stack;
  stack.push_back({AddNode(tree, mean_of(all)), 0, std::move(all)});
  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    const auto n = static_cast<double>(cur.rows.size());
    if (cur.rows.size() < 2 || (max_depth > 0 && cur.depth >= max_depth)) continue;
    double sum = 0, sq = 0;
    for (int r : cur.rows) {
      sum += target[r];
      sq += target[r] * target[r];
    }
    if (sq - sum * sum / n <= 1e-15) continue;

    // Maximizing S_l^2/n_l + S_r^2/n_r minimizes the children's squared error.
    SplitChoice best;
    best.score = -std::numeric_limits<double>::infinity();
    std::vector<int> rows = cur.rows;
    for (int f = 0; f < p; ++f) {
      SortByFeature(rows, X, f);
      double sl = 0;
      for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        sl += target[rows[i]];
        const double xi = X(rows[i], f), xn = X(rows[i + 1], f);
        if (xi == xn) continue;
        const double nl = static_cast<double>(i + 1);
        const double nr = n - nl;
        const double sr = sum - sl;
        const double score = sl * sl / nl + sr * sr / nr;
        if (score > best.score) best = {f, Midpoint(xi, xn), score};
      }
    }
    if (best.feature < 0) continue;
    std::vector<int> lrows, rrows;
    for (int r : cur.rows) (X(r, best.feature) <= best.threshold ? lrows : rrows).push_back(r);
    const int l = AddNode(tree, mean_of(lrows));
    const int r = AddNode(tree, mean_of(rrows));
    tree.feature[cur.node] = best.feature;
    tree.threshold[cur.node] = best.threshold;
    tree.left[cur.node] = l;
    tree.right[cur.node] = r;
    stack.push_back({r, cur.depth + 1, std::move(rrows)});
    stack.push_back({l, cur.depth + 1, std::move(lrows)});
  }
  return tree;
}

using internal::RequireBothClasses;
using internal::Shell;

TrainedModel TrainRandomForest(const LabeledMatrix& m, const TrainConfig& cfg) {
  RequireBothClasses(m.labels);
  const ForestConfig& fc = cfg.forest;
  if (fc.trees < 1) throw Error(ErrorCode::kConfig, "forest needs at least one tree");
  const auto n = static_cast<std::size_t>(m.rows());
  const Eigen::Index p = m.X.cols();
  TreeGrowth growth;
  growth.max_depth = fc.max_depth;
  growth.min_leaf = std::max(1, fc.min_leaf);
  growth.mtry = fc.mtry > 0 ? fc.mtry
                            : static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));

  ForestParams params;
  params.trees.resize(static_cast<std::size_t>(fc.trees));
  std::vector<Eigen::VectorXd> per_tree(params.trees.size());
  ParallelFor(params.trees.size(), [&](std::size_t t) {
    Rng rng = MakeRng(cfg.seed, t);
    std::vector<int> counts(n, fc.bootstrap ? 0 : 1);
    if (fc.bootstrap) {
      for (std::size_t i = 0; i < n; ++i) ++counts[UniformIndex(rng, n)];
    }
    Eigen::VectorXd imp = Eigen::VectorXd::Zero(p);
    params.trees[t] = GrowClassificationTree(m.X, m.labels, counts, growth, rng, &imp);
    const double s = imp.sum();
    if (s > 0) imp /= s;
    per_tree[t] = std::move(imp);
  });
  params.importance = Eigen::VectorXd::Zero(p);
  for (const auto& imp : per_tree) params.importance += imp;
  const double total = params.importance.sum();
  if (total > 0) {
    params.importance /= total;
  } else {
    params.importance.setConstant(1.0 / static_cast<double>(p));
  }

  TrainedModel model = Shell(ModelKind::kRandomForest, m.schema, cfg);
  model.params = std::move(params);
  return model;
}

TrainedModel TrainGradientBoosting(const LabeledMatrix& m, const TrainConfig& cfg) {
  RequireBothClasses(m.labels);
  const BoostingConfig& bc = cfg.boosting;
  if (bc.rounds < 0) throw Error(ErrorCode::kConfig, "boosting rounds must be >= 0");
  if (!(bc.learning_rate > 0)) throw Error(ErrorCode::kConfig, "learning rate must be > 0");
  const Eigen::Index n = m.rows();
  const double rate = m.labels.mean();

  BoostingParams params;
  params.base_score = std::log(rate / (1.0 - rate));
  params.learning_rate = bc.learning_rate;
  Eigen::VectorXd score = Eigen::VectorXd::Constant(n, params.base_score);
  for (int round = 0; round < bc.rounds; ++round) {
    Eigen::VectorXd residual(n);
    for (Eigen::Index i = 0; i < n; ++i) residual[i] = m.labels[i] - nn::Sigmoid(score[i]);
    Tree tree = GrowRegressionTree(m.X, residual, bc.max_depth);
    for (Eigen::Index i = 0; i < n; ++i) score[i] += bc.learning_rate * tree.Predict(m.X.row(i));
    params.trees.push_back(std::move(tree));
  }

  TrainedModel model = Shell(ModelKind::kGradientBoosting, m.schema, cfg);
  model.params = std::move(params);
  return model;
}

}  // namespace deskaid
