#include "carasel/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "carasel/errors.hpp"
#include "carasel/parallel.hpp"

namespace carasel {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool psi_cellwise(const Corr& psi, const InfoPartition& part) {
  for (std::size_t z = 0; z < psi.nodes(); ++z)
    if (!lower_measurable_check(psi, part, z)) return false;
  return true;
}

// Number of cells on which the per-atom profile is not constant.
double profile_cell_variation(const std::vector<Vec>& values, const InfoPartition& part) {
  double bad = 0;
  for (const auto& cell : part.cells()) {
    for (std::size_t t : cell) {
      if ((values[t] - values[cell.front()]).norm() > 1e-12) {
        bad += 1;
        break;
      }
    }
  }
  return bad;
}

std::vector<std::vector<std::size_t>> cells_of(const InfoPartition& part) { return part.cells(); }

}  // namespace

Vec interpolate(const Selection& sel, std::size_t t, const Vec& x) {
  const GridSpace& grid = *sel.grid;
  if (x.size() != grid.dim()) throw DomainError("interpolate: point dimension differs from the grid");
  if (const auto& box = grid.box_shape()) {
    const auto d = static_cast<std::size_t>(grid.dim());
    std::vector<std::size_t> base(d), stride(d);
    std::vector<double> frac(d);
    std::size_t s = 1;
    for (std::size_t k = d; k-- > 0;) {
      stride[k] = s;
      s *= box->counts[k];
    }
    for (std::size_t k = 0; k < d; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      const std::size_t c = box->counts[k];
      if (c == 1) {
        base[k] = 0;
        frac[k] = 0.0;
        continue;
      }
      const double pos = std::clamp((x[kk] - box->lo[kk]) / (box->hi[kk] - box->lo[kk]) * static_cast<double>(c - 1),
                                    0.0, static_cast<double>(c - 1));
      base[k] = std::min(static_cast<std::size_t>(std::floor(pos)), c - 2);
      frac[k] = pos - static_cast<double>(base[k]);
    }
    Vec out = Vec::Zero(sel.value_dim);
    for (std::size_t corner = 0; corner < (std::size_t{1} << d); ++corner) {
      double wgt = 1.0;
      std::size_t node = 0;
      for (std::size_t k = 0; k < d; ++k) {
        const bool up = (corner >> k) & 1U;
        wgt *= up ? frac[k] : 1.0 - frac[k];
        node += (base[k] + (up ? 1 : 0)) * stride[k];
      }
      if (wgt == 0.0) continue;
      if (!sel.defined(t, node)) throw DomainError("interpolate: selection undefined at node " + std::to_string(node));
      out += wgt * sel.at(t, node);
    }
    return out;
  }
  Vec num = Vec::Zero(sel.value_dim);
  double den = 0.0;
  for (std::size_t z = 0; z < grid.size(); ++z) {
    if (!sel.defined(t, z)) continue;
    const double d = (grid.point(z) - x).norm();
    if (d < 1e-12) return sel.at(t, z);
    const double wgt = 1.0 / (d * d);
    num += wgt * sel.at(t, z);
    den += wgt;
  }
  if (den == 0.0) throw DomainError("interpolate: selection undefined everywhere");
  return num / den;
}

FixedPointProfile random_fixed_point(const Corr& psi, const CipWitness& w, const InfoPartition& part,
                                     const FixedPointOptions& opts) {
  if (psi.value_dim() != psi.grid().dim())
    throw PreconditionError("random_fixed_point: Ψ must map the grid space into itself");
  for (std::size_t t = 0; t < psi.atoms(); ++t)
    for (std::size_t z = 0; z < psi.nodes(); ++z)
      if (!psi.nonempty(t, z))
        throw PreconditionError("random_fixed_point: Ψ is empty at (atom " + psi.space().labels()[t] + ", node " +
                                std::to_string(z) + ")");
  if (!(opts.alpha > 0 && opts.alpha <= 1)) throw DomainError("random_fixed_point: alpha must lie in (0, 1]");

  FixedPointProfile out;
  out.selection = caratheodory_select(psi, w, part, opts.select).selection;
  const std::size_t atoms = psi.atoms();
  const auto& grid = psi.grid();
  out.values.assign(atoms, Vec());
  out.residuals.assign(atoms, kInf);
  out.method.assign(atoms, "");

  Vec bary = Vec::Zero(grid.dim());
  for (const auto& p : grid.points()) bary += p;
  bary /= static_cast<double>(grid.size());

  parallel_for(atoms, [&](std::size_t t) {
    Vec x = bary;
    for (std::size_t it = 0; it < opts.max_iter; ++it) {
      const Vec y = interpolate(out.selection, t, x);
      if ((y - x).norm() <= 1e-3 * opts.tol) break;
      x = (1.0 - opts.alpha) * x + opts.alpha * y;
    }
    const double r = (interpolate(out.selection, t, x) - x).norm();
    if (r <= opts.tol) {
      out.values[t] = x;
      out.residuals[t] = r;
      out.method[t] = "damped iteration";
      return;
    }
    std::size_t best = 0;
    double best_r = kInf;
    for (std::size_t z = 0; z < grid.size(); ++z) {
      const double rz = (out.selection.at(t, z) - grid.point(z)).norm();
      if (rz < best_r) {
        best_r = rz;
        best = z;
      }
    }
    if (best_r < r) {
      out.values[t] = grid.point(best);
      out.residuals[t] = best_r;
      out.method[t] = "grid minimization";
    } else {
      out.values[t] = x;
      out.residuals[t] = r;
      out.method[t] = "damped iteration";
    }
  });

  double worst = 0.0;
  std::size_t worst_t = 0;
  for (std::size_t t = 0; t < atoms; ++t) {
    if (out.residuals[t] > worst) {
      worst = out.residuals[t];
      worst_t = t;
    }
  }
  if (worst > opts.tol) {
    std::ostringstream msg;
    msg << "random_fixed_point: best residual " << worst << " at atom " << psi.space().labels()[worst_t]
        << " exceeds tol " << opts.tol;
    throw NoCertificateError(msg.str(), worst);
  }
  out.checks.push_back(make_check("fixed-point residual", worst, opts.tol, "max_t ‖ψ(t,x*(t)) − x*(t)‖"));
  if (part.is_finest()) {
    out.checks.push_back(make_check("profile measurability", 0.0, 0.0, "trivially measurable (finest partition)"));
  } else if (psi_cellwise(psi, part)) {
    out.checks.push_back(make_check("profile measurability", profile_cell_variation(out.values, part), 0.0,
                                    "cells on which x* varies"));
  } else {
    out.checks.push_back(make_check("profile measurability", 0.0, 0.0,
                                    "Ψ varies within cells; trivially measurable (atomic σ-algebra)"));
  }
  for (const auto& c : out.selection.checks) out.checks.push_back(c);
  return out;
}

JointGrid::JointGrid(std::vector<std::shared_ptr<const GridSpace>> grids) : grids_(std::move(grids)) {
  if (grids_.empty()) throw DomainError("JointGrid: no players");
  const std::size_t p = grids_.size();
  strides_.assign(p, 1);
  offsets_.assign(p, 0);
  std::size_t total = 1;
  for (std::size_t i = p; i-- > 0;) {
    if (!grids_[i]) throw DomainError("JointGrid: missing strategy grid");
    strides_[i] = total;
    total *= grids_[i]->size();
  }
  int off = 0;
  bool boxes = true;
  double mesh = 0.0;
  for (std::size_t i = 0; i < p; ++i) {
    offsets_[i] = off;
    off += grids_[i]->dim();
    boxes = boxes && grids_[i]->box_shape().has_value();
    mesh = std::max(mesh, grids_[i]->mesh());
  }
  if (boxes) {
    Vec lo(off), hi(off);
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < p; ++i) {
      const auto& b = *grids_[i]->box_shape();
      lo.segment(offsets_[i], grids_[i]->dim()) = b.lo;
      hi.segment(offsets_[i], grids_[i]->dim()) = b.hi;
      counts.insert(counts.end(), b.counts.begin(), b.counts.end());
    }
    joint_ = std::make_shared<const GridSpace>(GridSpace::box(lo, hi, counts));
    return;
  }
  std::vector<Vec> pts;
  pts.reserve(total);
  for (std::size_t j = 0; j < total; ++j) {
    Vec v(off);
    for (std::size_t i = 0; i < p; ++i) v.segment(offsets_[i], grids_[i]->dim()) = grids_[i]->point(component(j, i));
    pts.push_back(std::move(v));
  }
  joint_ = std::make_shared<const GridSpace>(GridSpace(std::move(pts), mesh));
}

std::vector<std::size_t> JointGrid::decode(std::size_t joint) const {
  std::vector<std::size_t> out(players());
  for (std::size_t i = 0; i < players(); ++i) out[i] = component(joint, i);
  return out;
}

std::size_t JointGrid::encode(const std::vector<std::size_t>& nodes) const {
  if (nodes.size() != players()) throw DomainError("JointGrid::encode: wrong number of components");
  std::size_t j = 0;
  for (std::size_t i = 0; i < players(); ++i) {
    if (nodes[i] >= grids_[i]->size()) throw DomainError("JointGrid::encode: node out of range");
    j += nodes[i] * strides_[i];
  }
  return j;
}

std::size_t JointGrid::component(std::size_t joint, std::size_t i) const {
  return (joint / strides_[i]) % grids_[i]->size();
}

std::size_t JointGrid::with(std::size_t joint, std::size_t i, std::size_t y) const {
  return joint - component(joint, i) * strides_[i] + y * strides_[i];
}

Vec JointGrid::block(const Vec& joint, std::size_t i) const { return joint.segment(offsets_[i], grids_[i]->dim()); }

PayoffTables tabulate(const GameSpec& g, const JointGrid& joint) {
  if (!g.payoff) throw DomainError("tabulate: game has no payoff function");
  const std::size_t n = joint.size();
  const std::size_t atoms = g.space->size();
  PayoffTables tab;
  tab.u.assign(joint.players(), std::vector<double>(atoms * n, 0.0));
  parallel_for(atoms, [&](std::size_t t) {
    for (std::size_t x = 0; x < n; ++x) {
      const Vec& v = joint.grid()->point(x);
      for (std::size_t i = 0; i < joint.players(); ++i) {
        const double u = g.payoff(i, t, v);
        if (!std::isfinite(u))
          throw DomainError("tabulate: non-finite payoff for player " + std::to_string(i) + " at joint node " +
                            std::to_string(x));
        tab.u[i][t * n + x] = u;
      }
    }
  });
  return tab;
}

Corr pref_from_payoff(const GameSpec& g, const JointGrid& joint, const PayoffTables& tables, std::size_t i,
                      double strict_margin) {
  if (i >= joint.players()) throw DomainError("pref_from_payoff: player out of range");
  const std::size_t n = joint.size();
  const auto& gi = joint.player_grid(i);
  return Corr::from_function(g.space, joint.grid(), gi.dim(), [&](std::size_t t, std::size_t x) {
    const double base = tables.at(i, t, x, n);
    std::vector<Vec> better;
    for (std::size_t y = 0; y < gi.size(); ++y)
      if (tables.at(i, t, joint.with(x, i, y), n) - base > strict_margin) better.push_back(gi.point(y));
    return PointSet(gi.dim(), std::move(better));
  });
}

Corr pref_from_payoff(const GameSpec& g, std::size_t i, double strict_margin) {
  const JointGrid joint(g.strategy_grids);
  return pref_from_payoff(g, joint, tabulate(g, joint), i, strict_margin);
}

EquilibriumCertificate random_equilibrium(const RandomGame& game, const std::vector<CipWitness>& witnesses,
                                          const InfoPartition& part, double eps_eq, const EquilibriumOptions& opts) {
  if (!game.joint || !game.space) throw DomainError("random_equilibrium: incomplete game");
  const JointGrid& joint = *game.joint;
  const std::size_t players = joint.players();
  const std::size_t n = joint.size();
  const std::size_t atoms = game.space->size();
  if (game.prefs.size() != players || witnesses.size() != players)
    throw DomainError("random_equilibrium: one preference correspondence and one witness per player expected");
  if (part.space().size() != atoms) throw DomainError("random_equilibrium: partition on a different atom space");
  for (std::size_t i = 0; i < players; ++i) {
    const auto& p = game.prefs[i];
    if (!p || p->nodes() != n || p->atoms() != atoms || p->value_dim() != joint.player_grid(i).dim())
      throw DomainError("random_equilibrium: preference of player " + std::to_string(i) + " has the wrong shape");
  }
  const auto& labels = game.space->labels();

  // Irreflexivity x_i ∉ con P_i(ω, x).
  for (std::size_t i = 0; i < players; ++i) {
    for (std::size_t t = 0; t < atoms; ++t) {
      for (std::size_t x = 0; x < n; ++x) {
        const auto& v = game.prefs[i]->at(t, x);
        if (v.empty()) continue;
        const Vec xi = joint.block(joint.grid()->point(x), i);
        if (dist_to_hull(xi, v.points()) <= 1e-12 * std::max(1.0, xi.cwiseAbs().maxCoeff())) {
          throw PreconditionError("irreflexivity fails: x_i ∈ con P_i(ω, x) at (ω=" + labels[t] + ", x=" +
                                  std::to_string(x) + ", i=" + std::to_string(i) + ")");
        }
      }
    }
  }

  EquilibriumCertificate cert;
  cert.eps_eq = eps_eq;
  cert.measurable_wrt = cells_of(part);
  std::vector<Corr> f;
  std::vector<Selection> sels;
  for (std::size_t i = 0; i < players; ++i) {
    auto s = caratheodory_select(*game.prefs[i], witnesses[i], part, opts.select);
    const auto& gi = joint.player_grid(i);
    const Corr fallback(game.space, joint.grid(), gi.dim(),
                        std::vector<PointSet>(atoms * n, PointSet(gi.dim(), gi.points())));
    f.push_back(glue_table(*game.prefs[i], s.selection, fallback));
    for (const auto& c : s.selection.checks) {
      Check pc = c;
      pc.name = "P" + std::to_string(i) + "." + c.name;
      cert.checks.push_back(std::move(pc));
    }
    sels.push_back(std::move(s.selection));
  }

  auto regret_of = [&](std::size_t t, std::size_t x, std::size_t i) {
    const auto& u = *game.payoffs;
    const double base = u.at(i, t, x, n);
    double best = base;
    for (std::size_t y = 0; y < joint.player_grid(i).size(); ++y) best = std::max(best, u.at(i, t, joint.with(x, i, y), n));
    return best - base;
  };

  cert.profile.assign(atoms, 0);
  cert.profile_values.assign(atoms, Vec());
  std::vector<std::string> missing(atoms);
  parallel_for(atoms, [&](std::size_t t) {
    bool found = false;
    double best_score = kInf;
    std::size_t best = 0;
    for (std::size_t x = 0; x < n; ++x) {
      const Vec& pt = joint.grid()->point(x);
      bool fixed = true;
      for (std::size_t i = 0; i < players && fixed; ++i) fixed = f[i].at(t, x).has_point_near(joint.block(pt, i), 1e-9);
      if (!fixed) continue;
      double score = 0.0;
      if (game.payoffs)
        for (std::size_t i = 0; i < players; ++i) score = std::max(score, regret_of(t, x, i));
      if (!found || score < best_score - 1e-12) {
        found = true;
        best_score = score;
        best = x;
      }
      if (!game.payoffs) break;
    }
    if (!found) {
      missing[t] = labels[t];
      return;
    }
    cert.profile[t] = best;
    cert.profile_values[t] = joint.grid()->point(best);
  });
  for (std::size_t t = 0; t < atoms; ++t) {
    if (missing[t].empty()) continue;
    double best = kInf;
    if (game.payoffs) {
      for (std::size_t x = 0; x < n; ++x) {
        double s = 0;
        for (std::size_t i = 0; i < players; ++i) s = std::max(s, regret_of(t, x, i));
        best = std::min(best, s);
      }
    }
    throw NoCertificateError("random_equilibrium: Λ has no fixed point on the grid at atom " + missing[t], best);
  }

  double fp = 0.0, nonempty = 0.0;
  for (std::size_t t = 0; t < atoms; ++t) {
    const std::size_t x = cert.profile[t];
    for (std::size_t i = 0; i < players; ++i) {
      if (game.prefs[i]->nonempty(t, x)) {
        nonempty += 1;
        fp = std::max(fp, (sels[i].at(t, x) - joint.block(cert.profile_values[t], i)).norm());
      }
    }
  }
  cert.checks.push_back(make_check("fixed-point", fp, 1e-9, "x*_i against ψ_i(ω, x*) where P_i(ω, x*) ≠ ∅"));
  cert.checks.push_back(make_check("preference-empty", nonempty, 0.0, "(ω, i) with P_i(ω, x*(ω)) ≠ ∅"));
  if (game.payoffs) {
    double worst = 0.0;
    cert.regret.assign(atoms, std::vector<double>(players, 0.0));
    for (std::size_t t = 0; t < atoms; ++t)
      for (std::size_t i = 0; i < players; ++i) {
        cert.regret[t][i] = regret_of(t, cert.profile[t], i);
        worst = std::max(worst, cert.regret[t][i]);
      }
    cert.checks.push_back(make_check("regret", worst, eps_eq, "max_{ω,i} max_{y_i} u_i(ω, y_i, x*_{−i}) − u_i(ω, x*)"));
  }
  if (part.is_finest()) {
    cert.checks.push_back(make_check("profile measurability", 0.0, 0.0, "trivially measurable (finest partition)"));
  } else {
    cert.checks.push_back(make_check("profile measurability", profile_cell_variation(cert.profile_values, part), 0.0,
                                     "cells on which x* varies"));
  }
  return cert;
}

EquilibriumCertificate random_nash(const GameSpec& g, const InfoPartition& part, double eps_eq,
                                   const EquilibriumOptions& opts) {
  if (!g.space) throw DomainError("random_nash: game without a state space");
  if (g.strategy_grids.empty()) throw DomainError("random_nash: no players");
  if (!(eps_eq >= 0)) throw DomainError("random_nash: eps_eq must be nonnegative");
  auto joint = std::make_shared<const JointGrid>(g.strategy_grids);
  if (joint->size() > opts.max_joint_nodes)
    throw DomainError("random_nash: joint grid has " + std::to_string(joint->size()) + " nodes, above the cap of " +
                      std::to_string(opts.max_joint_nodes));
  const std::size_t players = joint->players();
  const std::size_t atoms = g.space->size();
  const std::size_t n = joint->size();
  auto tables = std::make_shared<const PayoffTables>(tabulate(g, *joint));

  std::vector<std::string> warnings;
  std::mt19937_64 rng(opts.seed);
  for (std::size_t i = 0; i < players; ++i) {
    const std::string name = i < g.players.size() ? g.players[i] : std::to_string(i);
    const bool declared = i < g.concavity_declared.size() && g.concavity_declared[i];
    if (!declared) {
      warnings.push_back("player " + name + ": quasi-concavity not declared");
      continue;
    }
    const auto& gi = joint->player_grid(i);
    std::uniform_int_distribution<std::size_t> pick_x(0, n - 1), pick_y(0, gi.size() - 1);
    bool failed = false;
    for (std::size_t t = 0; t < atoms && !failed; ++t) {
      for (std::size_t k = 0; k < opts.spot_checks && !failed; ++k) {
        const std::size_t x = pick_x(rng);
        const std::size_t y0 = pick_y(rng), y1 = pick_y(rng);
        const double u0 = tables->at(i, t, joint->with(x, i, y0), n);
        const double u1 = tables->at(i, t, joint->with(x, i, y1), n);
        Vec mid = joint->grid()->point(x);
        mid.segment(joint->offset(i), gi.dim()) = 0.5 * (gi.point(y0) + gi.point(y1));
        const double um = g.payoff(i, t, mid);
        if (um < std::min(u0, u1) - 1e-9 * std::max({1.0, std::abs(u0), std::abs(u1)})) {
          warnings.push_back("player " + name + ": midpoint test failed at atom " + g.space->labels()[t]);
          failed = true;
        }
      }
    }
  }

  if (!part.is_finest()) {
    for (std::size_t i = 0; i < players; ++i)
      for (const auto& cell : part.cells())
        for (std::size_t t : cell)
          for (std::size_t x = 0; x < n; ++x) {
            const double a = tables->at(i, cell.front(), x, n), b = tables->at(i, t, x, n);
            if (std::abs(a - b) > 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}))
              throw PreconditionError("random_nash: payoff of player " + std::to_string(i) +
                                      " is not constant on the cell of atom " + g.space->labels()[t]);
          }
  }

  RandomGame game;
  game.space = g.space;
  game.joint = joint;
  game.payoffs = tables;
  std::vector<CipWitness> witnesses;
  for (std::size_t i = 0; i < players; ++i) {
    auto p = std::make_shared<const Corr>(pref_from_payoff(g, *joint, *tables, i, eps_eq));
    witnesses.push_back(canonical_witness(p, CipMode::shared));
    game.prefs.push_back(std::move(p));
  }
  auto cert = random_equilibrium(game, witnesses, part, eps_eq, opts);
  cert.warnings.insert(cert.warnings.begin(), warnings.begin(), warnings.end());
  return cert;
}

double bayes_h(const BayesSpec& b, std::size_t i, std::size_t omega, const Vec& x) {
  if (!b.partition) throw DomainError("bayes_h: no partition");
  if (i >= b.priors.size()) throw DomainError("bayes_h: no prior for player " + std::to_string(i));
  const auto& space = *b.game.space;
  const auto& q = b.priors[i].density();
  const auto& cell = b.partition->cell_containing(omega);
  double mass = 0.0;
  for (std::size_t s : cell) mass += q[s] * space.weight(s);
  if (!(mass > 0)) throw PreconditionError("bayes_h: cell of " + space.labels()[omega] + " has zero prior mass");
  double h = 0.0;
  for (std::size_t s : cell) h += (q[s] * space.weight(s) / mass) * b.game.payoff(i, s, x);
  return h;
}

EquilibriumCertificate bayes_equilibrium(const BayesSpec& b, double eps_eq, const EquilibriumOptions& opts) {
  if (!b.partition || !b.game.space) throw DomainError("bayes_equilibrium: incomplete specification");
  const std::size_t players = b.game.strategy_grids.size();
  if (b.priors.size() != players) throw DomainError("bayes_equilibrium: one prior per player expected");
  for (const auto& p : b.priors)
    if (p.space().labels() != b.game.space->labels()) throw DomainError("bayes_equilibrium: prior on a different atom space");
  if (b.partition->space().labels() != b.game.space->labels())
    throw DomainError("bayes_equilibrium: partition on a different atom space");

  GameSpec derived = b.game;
  derived.payoff = [&b](std::size_t i, std::size_t omega, const Vec& x) { return bayes_h(b, i, omega, x); };
  auto cert = random_nash(derived, *b.partition, eps_eq, opts);
  const double variation = profile_cell_variation(cert.profile_values, *b.partition);
  if (variation > 0) throw ConstructionError("bayes_equilibrium: profile is not constant on the information cells");
  return cert;
}

MaximalElementResult maximal_element(const Corr& p, const CipWitness& w, const InfoPartition& part, double eps_eq,
                                     const EquilibriumOptions& opts) {
  if (p.value_dim() != p.grid().dim()) throw DomainError("maximal_element: P must take values in the grid space");
  RandomGame game;
  game.space = p.space_ptr();
  game.joint = std::make_shared<const JointGrid>(std::vector<std::shared_ptr<const GridSpace>>{p.grid_ptr()});
  game.prefs = {std::make_shared<const Corr>(p)};
  auto cert = random_equilibrium(game, {w}, part, eps_eq, opts);

  MaximalElementResult out;
  out.nodes = cert.profile;
  out.values = cert.profile_values;
  double worst = 0.0;
  for (std::size_t x = 0; x < p.nodes(); ++x)
    for (const auto& cell : part.cells()) {
      const auto& ref = p.at(cell.front(), x);
      for (std::size_t t : cell) {
        const auto& v = p.at(t, x);
        if (ref.empty() != v.empty())
          worst = kInf;
        else if (!ref.empty())
          worst = std::max(worst, hausdorff_hull_dist(ref, v));
      }
    }
  out.checks = std::move(cert.checks);
  out.checks.push_back(make_check("joint lower measurability of con P", worst, 1e-9, kLowerMeasurableLabel));
  return out;
}

}  // namespace carasel
