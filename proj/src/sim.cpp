#include "reachctl/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <random>
#include <thread>

namespace reachctl {

std::string outcome_name(OutcomeKind k) {
  switch (k) {
    case OutcomeKind::ReachedF: return "ReachedF";
    case OutcomeKind::LeftP: return "LeftP";
    case OutcomeKind::Timeout: return "Timeout";
    case OutcomeKind::ControllerGap: return "ControllerGap";
  }
  return "Unknown";
}

double default_dt(const AffineSystem& sys, const PWAController& ctrl) {
  Vec beta = input_normal(sys);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& v : ctrl.region.vertices) {
    lo = std::min(lo, beta.dot(v));
    hi = std::max(hi, beta.dot(v));
  }
  double speed = 0.0;
  for (const auto& p : ctrl.pieces) {
    for (const auto& v : p.region.v) speed = std::max(speed, sys.field(v, p.control(v)).norm());
  }
  double extent = hi - lo;
  if (!(extent > 0)) {
    auto [a, b] = bounding_box(ctrl.region.vertices);
    extent = (b - a).norm();
  }
  if (!(speed > 0)) speed = 1.0;
  return 1e-3 * extent / speed;
}

double default_tmax(const AffineSystem& sys, const PWAController& ctrl, double dt) {
  double bound = 0.0;
  for (const auto& p : ctrl.pieces) {
    const Simplex& s = p.region;
    const int e = p.exit_facet;
    double rate = std::numeric_limits<double>::infinity();
    for (const auto& v : s.v) rate = std::min(rate, s.h[e].dot(sys.field(v, p.control(v))));
    if (!(rate > 0)) return 1e5 * dt;
    bound += (s.c[e] - s.h[e].dot(s.v[e])) / rate;
  }
  return std::max(1e5 * dt, 10.0 * bound);
}

namespace {

struct Stepper {
  const AffineSystem& sys;
  const AffinePiece& piece;

  Vec rhs(const Vec& x) const { return sys.field(x, piece.control(x)); }

  Vec step(const Vec& x, double h) const {
    Vec k1 = rhs(x);
    Vec k2 = rhs(x + 0.5 * h * k1);
    Vec k3 = rhs(x + 0.5 * h * k2);
    Vec k4 = rhs(x + h * k3);
    return x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
};

struct EventCheck {
  const Polytope& region;
  const Polytope& target;
  int fbar;  // facet of the region holding F, or -1
  double tol_sim;

  bool reached(const Vec& x) const {
    if (fbar < 0 || region.halfspaces[fbar].eval(x) < -1e-9) return false;
    return violation(target, x) <= tol_sim;
  }
  int left(const Vec& x) const {
    int worst = -1;
    double wv = tol_sim;
    for (int k = 0; k < static_cast<int>(region.halfspaces.size()); ++k) {
      double g = region.halfspaces[k].eval(x);
      if (g > wv) {
        wv = g;
        worst = k;
      }
    }
    return worst;
  }
  bool any(const Vec& x) const { return reached(x) || left(x) >= 0; }
};

double depth(const Polytope& p, const Vec& x) {
  double d = 0.0;
  for (const auto& h : p.halfspaces) d = std::max(d, h.eval(x));
  return d;
}

}  // namespace

Trajectory integrate(const AffineSystem& sys, const PWAController& ctrl, const Vec& x0, const SimOptions& opt) {
  const double dt = opt.dt ? *opt.dt : default_dt(sys, ctrl);
  const double tmax = opt.tmax ? *opt.tmax : default_tmax(sys, ctrl, dt);
  if (!(dt > 0)) throw Error(ErrorCode::Degenerate, "time step must be positive");
  const Polytope target = convex_hull(ctrl.target, opt.tol.geom);
  auto fbar = containing_facet(ctrl.region, ctrl.target, opt.tol.geom);
  EventCheck ev{ctrl.region, target, fbar ? *fbar : -1, opt.tol.sim};

  Trajectory tr;
  auto record = [&](double t, const Vec& x, int piece) {
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.controls.push_back(piece >= 0 ? ctrl.pieces[piece].control(x) : Vec::Zero(sys.m()));
    tr.pieces.push_back(piece);
    tr.max_violation = std::max(tr.max_violation, depth(ctrl.region, x));
  };

  Vec x = x0;
  double t = 0.0;
  int piece = ctrl.lookup(x, opt.tol.sim);
  record(t, x, piece);
  if (ev.reached(x)) {
    tr.outcome = {OutcomeKind::ReachedF, 0.0, -1};
    return tr;
  }
  int switches_window = 0;
  std::vector<int> switched;
  while (true) {
    if (piece < 0) {
      tr.outcome = {OutcomeKind::ControllerGap, t, -1};
      return tr;
    }
    if (t >= tmax) {
      tr.outcome = {OutcomeKind::Timeout, t, -1};
      return tr;
    }
    Stepper st{sys, ctrl.pieces[piece]};
    double h = std::min(dt, tmax - t);
    Vec y = st.step(x, h);
    if (ev.any(y)) {
      double lo = 0.0, hi = h;
      while (hi - lo > 1e-10) {
        double mid = 0.5 * (lo + hi);
        if (ev.any(st.step(x, mid))) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      y = st.step(x, hi);
      t += hi;
      tr.times.push_back(t);
      tr.states.push_back(y);
      tr.controls.push_back(ctrl.pieces[piece].control(y));
      tr.pieces.push_back(piece);
      if (ev.reached(y)) {
        tr.max_violation = std::max(tr.max_violation, depth(ctrl.region, y));
        tr.outcome = {OutcomeKind::ReachedF, t, -1};
      } else {
        tr.max_violation = std::max(tr.max_violation, depth(ctrl.region, y));
        tr.outcome = {OutcomeKind::LeftP, t, ev.left(y)};
      }
      return tr;
    }
    x = y;
    t += h;
    int next = ctrl.lookup(x, opt.tol.sim);
    int sw = next != piece ? 1 : 0;
    switched.push_back(sw);
    switches_window += sw;
    if (switched.size() > 10) {
      switches_window -= switched[switched.size() - 11];
    }
    if (switches_window >= 10) tr.chattering = true;
    piece = next;
    record(t, x, piece);
  }
}

Vec sample_in(const Polytope& p, std::uint64_t seed, int index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index)};
  std::mt19937_64 rng(seq);
  auto [lo, hi] = bounding_box(p.vertices);
  const int n = static_cast<int>(lo.size());
  for (int tries = 0; tries < 1000000; ++tries) {
    Vec x(n);
    for (int d = 0; d < n; ++d) {
      double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      x(d) = lo(d) + u * (hi(d) - lo(d));
    }
    if (contains(p, x, 0.0)) return x;
  }
  throw Error(ErrorCode::Degenerate, "rejection sampling found no interior point");
}

int worker_threads() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("REACHCTL_THREADS")) {
    int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return n;
}

VerifyReport verify(const AffineSystem& sys, const PWAController& ctrl, const Polytope& p, int nsamples,
                    std::uint64_t seed, const SimOptions& opt) {
  VerifyReport rep;
  rep.nsamples = std::max(nsamples, 0);
  if (rep.nsamples == 0) return rep;
  SimOptions o = opt;
  if (!o.dt) o.dt = default_dt(sys, ctrl);
  if (!o.tmax) o.tmax = default_tmax(sys, ctrl, *o.dt);

  std::vector<Vec> x0(rep.nsamples);
  std::vector<Trajectory> out(rep.nsamples);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < rep.nsamples; i = next++) {
      x0[i] = sample_in(p, seed, i);
      Trajectory tr = integrate(sys, ctrl, x0[i], o);
      if (tr.outcome.kind == OutcomeKind::ReachedF) {
        tr.states = {tr.states.front(), tr.states.back()};
        tr.times = {tr.times.front(), tr.times.back()};
        tr.controls = {tr.controls.front(), tr.controls.back()};
        tr.pieces = {tr.pieces.front(), tr.pieces.back()};
      }
      out[i] = std::move(tr);
    }
  };
  const int nt = std::min(worker_threads(), rep.nsamples);
  std::vector<std::thread> pool;
  for (int k = 1; k < nt; ++k) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();

  double sum = 0.0;
  for (int i = 0; i < rep.nsamples; ++i) {
    const Trajectory& tr = out[i];
    rep.max_violation = std::max(rep.max_violation, tr.max_violation);
    rep.chattering += tr.chattering;
    if (tr.outcome.kind == OutcomeKind::ReachedF) {
      ++rep.successes;
      rep.max_time = std::max(rep.max_time, tr.outcome.t);
      sum += tr.outcome.t;
    } else {
      rep.failures.push_back({i, x0[i], tr});
    }
  }
  rep.success_fraction = static_cast<double>(rep.successes) / rep.nsamples;
  rep.mean_time = rep.successes > 0 ? sum / rep.successes : 0.0;
  return rep;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  const int n = traj.states.empty() ? 0 : static_cast<int>(traj.states.front().size());
  const int m = traj.controls.empty() ? 0 : static_cast<int>(traj.controls.front().size());
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= m; ++i) os << ",u" << i;
  os << ",piece\n";
  for (size_t k = 0; k < traj.times.size(); ++k) {
    os << format_number(traj.times[k]);
    for (int i = 0; i < n; ++i) os << ',' << format_number(traj.states[k](i));
    for (int i = 0; i < m; ++i) os << ',' << format_number(traj.controls[k](i));
    os << ',' << traj.pieces[k] << '\n';
  }
}

}  // namespace reachctl
