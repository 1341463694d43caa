#include "shortfall/pwl.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shortfall {

namespace {

constexpr double kFuseRel = 1e-14;     // breaks closer than this (relative) fuse
constexpr double kSlopeRel = 1e-12;    // collinear when slopes agree this well
constexpr double kChordRel = 1e-13;    // or when the middle point is this close
constexpr double kRepairRel = 1e-9;    // largest invariant violation repaired
constexpr double kTieRel = 1e-12;      // value ties in the envelope

double value_scale(const std::vector<double>& vs) {
  double m = 1.0;
  for (double v : vs) m = std::max(m, std::abs(v));
  return m;
}

bool collinear(double ya, double va, double yb, double vb, double yc, double vc,
               double vscale) {
  const double s1 = (vb - va) / (yb - ya);
  const double s2 = (vc - vb) / (yc - yb);
  if (std::abs(s1 - s2) <= kSlopeRel * std::max(std::abs(s1), std::abs(s2))) {
    return true;
  }
  const double chord = va + (vc - va) * ((yb - ya) / (yc - ya));
  return std::abs(vb - chord) <= kChordRel * vscale;
}

// Removes redundant breaks (fused, collinear, flat tail) and builds the
// function.
PwlFn make_pruned(const std::vector<double>& ys, const std::vector<double>& vs) {
  const double vscale = value_scale(vs);
  std::vector<double> by;
  std::vector<double> bv;
  by.reserve(ys.size());
  bv.reserve(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    const double v = vs[i];
    if (!by.empty() && y - by.back() <= kFuseRel * std::max(1.0, std::abs(y))) {
      continue;
    }
    while (by.size() >= 2 &&
           collinear(by[by.size() - 2], bv[bv.size() - 2], by.back(), bv.back(),
                     y, v, vscale)) {
      by.pop_back();
      bv.pop_back();
    }
    by.push_back(y);
    bv.push_back(v);
  }
  // A last segment that is flat continues into the constant tail.
  while (by.size() >= 2 &&
         std::abs(bv.back() - bv[bv.size() - 2]) <= kChordRel * vscale) {
    const double keep = std::min(bv.back(), bv[bv.size() - 2]);
    by.pop_back();
    bv.pop_back();
    bv.back() = keep;
  }
  if (by.empty()) {
    by.push_back(0.0);
    bv.push_back(0.0);
  }
  return PwlFn(std::move(by), std::move(bv));
}

// Pointwise combination over the merged breaks plus crossing points.
template <class Pick>
PwlFn combine(const PwlFn& f, const PwlFn& g, Pick pick) {
  std::vector<double> grid;
  grid.reserve(f.size() + g.size());
  std::merge(f.breaks().begin(), f.breaks().end(), g.breaks().begin(),
             g.breaks().end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<double> ys;
  std::vector<double> vs;
  ys.reserve(grid.size() * 2);
  vs.reserve(grid.size() * 2);
  double prev_y = 0.0;
  double prev_a = 0.0;
  double prev_b = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double y = grid[i];
    const double a = f(y);
    const double b = g(y);
    if (i > 0) {
      const double d0 = prev_a - prev_b;
      const double d1 = a - b;
      if ((d0 < 0.0 && d1 > 0.0) || (d0 > 0.0 && d1 < 0.0)) {
        const double t = d0 / (d0 - d1);
        const double yc = prev_y + (y - prev_y) * t;
        if (yc > prev_y && yc < y) {
          ys.push_back(yc);
          vs.push_back(prev_a + (a - prev_a) * t);
        }
      }
    }
    ys.push_back(y);
    vs.push_back(pick(a, b));
    prev_y = y;
    prev_a = a;
    prev_b = b;
  }
  return make_pruned(ys, vs);
}

}  // namespace

PwlFn::PwlFn() : breaks_{0.0}, values_{0.0} {}

PwlFn::PwlFn(std::vector<double> breaks, std::vector<double> values)
    : breaks_(std::move(breaks)), values_(std::move(values)) {
  if (breaks_.empty() || breaks_.size() != values_.size()) {
    throw std::invalid_argument("PwlFn: breaks and values must be nonempty "
                                "and of equal length");
  }
  if (breaks_.front() != 0.0) {
    throw std::invalid_argument("PwlFn: first break must be 0");
  }
  const double tol = kRepairRel * value_scale(values_);
  for (std::size_t i = 0; i < breaks_.size(); ++i) {
    if (!std::isfinite(breaks_[i]) || !std::isfinite(values_[i])) {
      throw std::invalid_argument("PwlFn: non-finite break or value");
    }
    if (i > 0 && !(breaks_[i] > breaks_[i - 1])) {
      throw std::invalid_argument("PwlFn: breaks must be strictly increasing");
    }
    if (values_[i] < 0.0) {
      if (values_[i] < -tol) {
        throw std::invalid_argument("PwlFn: negative value " +
                                    std::to_string(values_[i]));
      }
      values_[i] = 0.0;
    }
    if (i > 0 && values_[i] > values_[i - 1]) {
      if (values_[i] > values_[i - 1] + tol) {
        throw std::invalid_argument("PwlFn: values must be nonincreasing");
      }
      values_[i] = values_[i - 1];
    }
  }
}

PwlFn PwlFn::hinge(double level) {
  if (!(level >= 0.0) || !std::isfinite(level)) {
    throw std::invalid_argument("hinge level must be finite and >= 0");
  }
  if (level == 0.0) return PwlFn();
  return PwlFn({0.0, level}, {level, 0.0});
}

double PwlFn::operator()(double y) const {
  if (!(y >= 0.0)) throw std::invalid_argument("PwlFn evaluated at y < 0");
  if (y >= breaks_.back()) return values_.back();
  const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), y);
  const std::size_t i = static_cast<std::size_t>(it - breaks_.begin());
  const double y0 = breaks_[i - 1];
  const double y1 = breaks_[i];
  const double v0 = values_[i - 1];
  const double v1 = values_[i];
  return v0 + (v1 - v0) * ((y - y0) / (y1 - y0));
}

PwlFn pointwise_min(const PwlFn& f, const PwlFn& g) {
  return combine(f, g, [](double a, double b) { return std::min(a, b); });
}

PwlFn pointwise_max(const PwlFn& f, const PwlFn& g) {
  return combine(f, g, [](double a, double b) { return std::max(a, b); });
}

const char* to_string(CandidateKind kind) {
  switch (kind) {
    case CandidateKind::LeftEndpoint:
      return "left_endpoint";
    case CandidateKind::RightEndpoint:
      return "right_endpoint";
    case CandidateKind::UpBreakpoint:
      return "up_breakpoint";
    case CandidateKind::DownBreakpoint:
      return "down_breakpoint";
    case CandidateKind::InteriorFlat:
      return "interior_flat";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Lower envelope of the candidate curves.

namespace {

struct Candidate {
  CandidateKind kind;
  double alpha;
  double beta;

  double u(double y) const { return alpha + beta * y; }
};

// One linear piece of a (partial) curve on [y0, y1]; y1 = inf means constant.
struct Seg {
  double y0;
  double y1;
  double v0;
  double v1;
  int cand;
  bool flat;
};

double seg_value(const Seg& s, double y) {
  if (y <= s.y0) return s.v0;
  if (!(s.y1 < kInf)) return s.v0;
  if (y >= s.y1) return s.v1;
  return s.v0 + (s.v1 - s.v0) * ((y - s.y0) / (s.y1 - s.y0));
}

int sign_tol(double d, double tol) {
  if (d > tol) return 1;
  if (d < -tol) return -1;
  return 0;
}

class Envelope {
 public:
  explicit Envelope(std::vector<Candidate>& cands) : cands_(cands) {}

  void reset(std::vector<Seg> curve) { env_ = std::move(curve); }

  // env := min(env, curve); env covers [0, inf), curve covers [c0, inf).
  void merge(const std::vector<Seg>& curve) {
    out_.clear();
    out_.reserve(env_.size() + curve.size() + 8);
    const double c0 = curve.front().y0;
    std::size_t i = 0;
    while (i < env_.size() && env_[i].y1 <= c0) out_.push_back(env_[i++]);
    Seg head = env_[i];
    if (head.y0 < c0) {
      Seg left = head;
      left.y1 = c0;
      left.v1 = seg_value(head, c0);
      push(left);
    }
    double y = c0;
    std::size_t j = 0;
    while (true) {
      const Seg& a = env_[i];
      const Seg& b = curve[j];
      const double r = std::min(a.y1, b.y1);
      compare(y, r, a, b);
      if (!(r < kInf)) break;
      if (a.y1 == r) ++i;
      if (b.y1 == r) ++j;
      y = r;
    }
    env_.swap(out_);
  }

  const std::vector<Seg>& segments() const { return env_; }

 private:
  void push(Seg s) {
    if (!(s.y1 > s.y0)) return;
    if (!out_.empty()) {
      Seg& last = out_.back();
      if (last.cand == s.cand && last.flat == s.flat && last.y1 == s.y0 &&
          last.y1 < kInf) {
        const bool tail = !(s.y1 < kInf);
        if (tail && std::abs(last.v1 - last.v0) <= 0.0) {
          last.y1 = kInf;
          return;
        }
        if (!tail) {
          const double s1 = (last.v1 - last.v0) / (last.y1 - last.y0);
          const double s2 = (s.v1 - s.v0) / (s.y1 - s.y0);
          if (std::abs(s1 - s2) <=
              kSlopeRel * std::max(std::abs(s1), std::abs(s2))) {
            last.y1 = s.y1;
            last.v1 = s.v1;
            return;
          }
        }
      }
    }
    out_.push_back(s);
  }

  void emit(double l, double r, double vl, double vr, int cand, bool flat) {
    if (!(r < kInf)) vr = vl;
    push(Seg{l, r, vl, vr, cand, flat});
  }

  // Equal values on [l, r]: the smaller exposure wins, split where the two
  // exposure lines cross.
  void tie(double l, double r, double vl, double vr, const Seg& a,
           const Seg& b) {
    const Candidate& ca = cands_[static_cast<std::size_t>(a.cand)];
    const Candidate& cb = cands_[static_cast<std::size_t>(b.cand)];
    const double da = ca.alpha - cb.alpha;
    const double db = ca.beta - cb.beta;
    const double ulscale = 1.0 + std::abs(ca.u(l)) + std::abs(cb.u(l));
    const double el = da + db * l;
    const int sl = sign_tol(el, 1e-12 * ulscale);
    int sr = 0;
    if (r < kInf) {
      sr = sign_tol(da + db * r, 1e-12 * ulscale);
    } else {
      sr = sign_tol(db, 1e-12 * (std::abs(ca.beta) + std::abs(cb.beta)));
      if (sr == 0) sr = sl;
    }
    const bool distinct = a.cand != b.cand && (sl != 0 || sr != 0);
    auto flat_for = [&](int cand) {
      const CandidateKind k = cands_[static_cast<std::size_t>(cand)].kind;
      return distinct && k != CandidateKind::LeftEndpoint &&
             k != CandidateKind::RightEndpoint;
    };
    if (sl * sr < 0 && db != 0.0) {
      const double ys = -da / db;
      if (ys > l && (ys < r)) {
        const double vs =
            r < kInf ? vl + (vr - vl) * ((ys - l) / (r - l)) : vl;
        const int first = sl < 0 ? a.cand : b.cand;
        const int second = sl < 0 ? b.cand : a.cand;
        emit(l, ys, vl, vs, first, flat_for(first));
        emit(ys, r, vs, vr, second, flat_for(second));
        return;
      }
    }
    const int s = sl != 0 ? sl : sr;
    const int pick = s > 0 ? b.cand : a.cand;
    emit(l, r, vl, vr, pick, flat_for(pick));
  }

  void compare(double l, double r, const Seg& a, const Seg& b) {
    if (!(r > l)) return;
    const double al = seg_value(a, l);
    const double bl = seg_value(b, l);
    if (!(r < kInf)) {
      const double tol = kTieRel * (1.0 + std::max(std::abs(al), std::abs(bl)));
      const int s = sign_tol(al - bl, tol);
      if (s == 0) {
        tie(l, r, std::min(al, bl), std::min(al, bl), a, b);
      } else {
        emit(l, r, s > 0 ? bl : al, s > 0 ? bl : al, s > 0 ? b.cand : a.cand,
             s > 0 ? b.flat : a.flat);
      }
      return;
    }
    const double ar = seg_value(a, r);
    const double br = seg_value(b, r);
    const double tol =
        kTieRel * (1.0 + std::max({std::abs(al), std::abs(bl), std::abs(ar),
                                   std::abs(br)}));
    const double dl = al - bl;
    const double dr = ar - br;
    const int sl = sign_tol(dl, tol);
    const int sr = sign_tol(dr, tol);
    if (sl == 0 && sr == 0) {
      tie(l, r, std::min(al, bl), std::min(ar, br), a, b);
    } else if (sl >= 0 && sr >= 0) {
      emit(l, r, bl, br, b.cand, b.flat);
    } else if (sl <= 0 && sr <= 0) {
      emit(l, r, al, ar, a.cand, a.flat);
    } else {
      const double t = dl / (dl - dr);
      const double ym = l + (r - l) * t;
      const double vm = al + (ar - al) * t;
      if (sl < 0) {
        emit(l, ym, al, vm, a.cand, a.flat);
        emit(ym, r, vm, br, b.cand, b.flat);
      } else {
        emit(l, ym, bl, vm, b.cand, b.flat);
        emit(ym, r, vm, ar, a.cand, a.flat);
      }
    }
  }

  std::vector<Candidate>& cands_;
  std::vector<Seg> env_;
  std::vector<Seg> out_;
};

// offset + weight * h(shift + scale * y) on [y_start, inf), scale > 0, where
// shift + scale * y_start = 0.
std::vector<Seg> compose_curve(const PwlFn& h, double offset, double weight,
                               double shift, double scale, double y_start,
                               int cand) {
  std::vector<Seg> out;
  const auto hb = h.breaks();
  const auto hv = h.values();
  out.reserve(hb.size() + 1);
  double y_prev = y_start;
  double v_prev = offset + weight * hv[0];
  for (std::size_t i = 1; i < hb.size(); ++i) {
    const double y = (hb[i] - shift) / scale;
    const double v = offset + weight * hv[i];
    if (!(y > y_prev)) {
      v_prev = v;
      continue;
    }
    out.push_back(Seg{y_prev, y, v_prev, v, cand, false});
    y_prev = y;
    v_prev = v;
  }
  out.push_back(Seg{y_prev, kInf, v_prev, v_prev, cand, false});
  return out;
}

}  // namespace

namespace {

void check_step(double p, double a1, double a2) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("bellman_compose: p must lie in (0, 1)");
  }
  if (!(a1 > 0.0 && a2 < 0.0)) {
    throw std::invalid_argument("bellman_compose: need a1 > 0 > a2");
  }
}

void append_piece(std::vector<AffinePolicyPiece>& pieces, double lo, double hi,
                  double alpha, double beta, CandidateKind kind) {
  if (!pieces.empty()) {
    AffinePolicyPiece& last = pieces.back();
    if (last.alpha == alpha && last.beta == beta && last.kind == kind) {
      last.hi = hi;
      return;
    }
  }
  pieces.push_back({lo, hi, alpha, beta, kind});
}

}  // namespace

bool is_convex(const PwlFn& f) {
  const auto b = f.breaks();
  const auto v = f.values();
  double prev = -kInf;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double s = (v[i + 1] - v[i]) / (b[i + 1] - b[i]);
    if (s < prev - kSlopeRel * std::abs(prev)) return false;
    prev = s;
  }
  return true;
}

BellmanResult bellman_compose(const PwlFn& up, const PwlFn& down, double p,
                              double a1, double a2) {
  if (is_convex(up) && is_convex(down)) {
    return bellman_compose_convex(up, down, p, a1, a2);
  }
  return bellman_compose_envelope(up, down, p, a1, a2);
}

BellmanResult bellman_compose_convex(const PwlFn& up, const PwlFn& down,
                                     double p, double a1, double a2) {
  check_step(p, a1, a2);
  const double q = 1.0 - p;
  const double lambda = -a2 / a1;
  const double gross = 1.0 + lambda;
  // In the coordinates s = lambda z_up, t = z_down the budget line reads
  // s + t = (1 + lambda) y; psi is min over s of A(s) + B(w - s).
  struct Piece {
    double len;
    double drop;
  };
  auto pieces_of = [](const PwlFn& h, double xscale, double weight) {
    std::vector<Piece> out;
    const auto b = h.breaks();
    const auto v = h.values();
    out.reserve(b.size());
    for (std::size_t i = 0; i + 1 < b.size(); ++i) {
      const double drop = weight * (v[i + 1] - v[i]);
      if (drop < 0.0) out.push_back({xscale * (b[i + 1] - b[i]), drop});
    }
    return out;
  };
  const std::vector<Piece> pa = pieces_of(up, lambda, p);
  const std::vector<Piece> pb = pieces_of(down, 1.0, q);

  std::vector<double> ys{0.0};
  std::vector<double> vs{p * up.at_zero() + q * down.at_zero()};
  BellmanResult result;
  double w = 0.0;
  double s = 0.0;  // consumed along the up axis
  double t = 0.0;  // consumed along the down axis
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < pa.size() || j < pb.size()) {
    // Steepest descent first; on equal slopes keep z_up (hence u) small.
    bool take_b = i == pa.size();
    if (!take_b && j < pb.size()) {
      take_b = pb[j].drop * pa[i].len <= pa[i].drop * pb[j].len;
    }
    const Piece& piece = take_b ? pb[j] : pa[i];
    const double y0 = w / gross;
    w += piece.len;
    const double y1 = w / gross;
    if (take_b) {
      // z_up = s / lambda fixed, z_down runs along the down function.
      append_piece(result.policy, y0, y1, s / (lambda * a1), -1.0 / a1,
                   s == 0.0 ? CandidateKind::LeftEndpoint
                            : CandidateKind::UpBreakpoint);
      t += piece.len;
      ++j;
    } else {
      append_piece(result.policy, y0, y1, t / a2, -1.0 / a2,
                   t == 0.0 ? CandidateKind::RightEndpoint
                            : CandidateKind::DownBreakpoint);
      s += piece.len;
      ++i;
    }
    ys.push_back(y1);
    vs.push_back(vs.back() + piece.drop);
  }
  // The summed drops carry rounding; the tail value is known exactly.
  vs.back() = p * up.tail() + q * down.tail();
  const double y_end = w / gross;
  append_piece(result.policy, y_end, kInf, s / (lambda * a1), -1.0 / a1,
               s == 0.0 ? CandidateKind::LeftEndpoint
                        : CandidateKind::UpBreakpoint);
  result.value = make_pruned(ys, vs);
  return result;
}

BellmanResult bellman_compose_envelope(const PwlFn& up, const PwlFn& down,
                                       double p, double a1, double a2) {
  check_step(p, a1, a2);
  const double q = 1.0 - p;
  // Budget line of the next-step wealths: lambda z_up + z_down = (1+lambda) y.
  const double lambda = -a2 / a1;
  const double gross = 1.0 + lambda;

  std::vector<Candidate> cands;
  cands.reserve(up.size() + down.size() + 2);
  cands.push_back({CandidateKind::LeftEndpoint, 0.0, -1.0 / a1});
  cands.push_back({CandidateKind::RightEndpoint, 0.0, -1.0 / a2});

  Envelope env(cands);
  // Left endpoint: z_up = 0, z_down = (1+lambda) y.
  env.reset(compose_curve(down, p * up.at_zero(), q, 0.0, gross, 0.0, 0));
  // Right endpoint: z_down = 0, z_up = (1+lambda) y / lambda.
  env.merge(compose_curve(up, q * down.at_zero(), p, 0.0, gross / lambda, 0.0,
                          1));

  const auto ub = up.breaks();
  const auto uv = up.values();
  for (std::size_t i = 1; i < ub.size(); ++i) {
    const double b = ub[i];
    const int id = static_cast<int>(cands.size());
    cands.push_back({CandidateKind::UpBreakpoint, b / a1, -1.0 / a1});
    // z_up = b, z_down = (1+lambda) y - lambda b.
    env.merge(compose_curve(down, p * uv[i], q, -lambda * b, gross,
                            lambda * b / gross, id));
  }
  const auto db = down.breaks();
  const auto dv = down.values();
  for (std::size_t i = 1; i < db.size(); ++i) {
    const double c = db[i];
    const int id = static_cast<int>(cands.size());
    cands.push_back({CandidateKind::DownBreakpoint, c / a2, -1.0 / a2});
    // z_down = c, z_up = ((1+lambda) y - c) / lambda.
    env.merge(compose_curve(up, q * dv[i], p, -c / lambda, gross / lambda,
                            c / gross, id));
  }

  const std::vector<Seg>& segs = env.segments();
  double vmax = 1.0;
  for (const Seg& s : segs) vmax = std::max(vmax, std::abs(s.v0));
  std::vector<double> ys;
  std::vector<double> vs;
  ys.reserve(segs.size());
  vs.reserve(segs.size());
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i > 0 && std::abs(segs[i - 1].v1 - segs[i].v0) > kRepairRel * vmax) {
      throw std::logic_error("bellman_compose: envelope is discontinuous");
    }
    ys.push_back(segs[i].y0);
    vs.push_back(i > 0 ? std::min(segs[i - 1].v1, segs[i].v0) : segs[i].v0);
  }

  BellmanResult result{make_pruned(ys, vs), {}};
  for (const Seg& s : segs) {
    const Candidate& c = cands[static_cast<std::size_t>(s.cand)];
    const CandidateKind kind = s.flat ? CandidateKind::InteriorFlat : c.kind;
    append_piece(result.policy, s.y0, s.y1, c.alpha, c.beta, kind);
  }
  return result;
}

double policy_exposure(std::span<const AffinePolicyPiece> pieces, double y,
                       double a1, double a2) {
  if (!(y > 0.0)) return 0.0;
  auto it = std::lower_bound(
      pieces.begin(), pieces.end(), y,
      [](const AffinePolicyPiece& piece, double v) { return piece.hi < v; });
  if (it == pieces.end()) it = std::prev(pieces.end());
  double u = it->exposure(y);
  const auto next = std::next(it);
  if (it->hi == y && next != pieces.end()) u = std::min(u, next->exposure(y));
  const Interval bounds = exposure_bounds(y, a1, a2);
  return std::clamp(u, bounds.lo, bounds.hi);
}

bool policy_feasible(std::span<const AffinePolicyPiece> pieces, double a1,
                     double a2, double tol) {
  if (pieces.empty() || pieces.front().lo != 0.0) return false;
  auto ok = [&](const AffinePolicyPiece& piece, double y) {
    const Interval b = exposure_bounds(y, a1, a2);
    const double slack = tol * (1.0 + std::abs(b.lo) + std::abs(b.hi));
    const double u = piece.exposure(y);
    return u >= b.lo - slack && u <= b.hi + slack;
  };
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const AffinePolicyPiece& piece = pieces[i];
    if (i > 0 && piece.lo != pieces[i - 1].hi) return false;
    if (!ok(piece, piece.lo)) return false;
    if (piece.hi < kInf) {
      if (!ok(piece, piece.hi)) return false;
    } else {
      // u(y) stays within the cone iff its slope does.
      const double slack = tol * (1.0 / a1 - 1.0 / a2);
      if (piece.beta < -1.0 / a1 - slack || piece.beta > -1.0 / a2 + slack) {
        return false;
      }
    }
  }
  return !(pieces.back().hi < kInf);
}

std::vector<Interval> region_le(const PwlFn& a, const PwlFn& b, double tol) {
  std::vector<double> grid;
  std::merge(a.breaks().begin(), a.breaks().end(), b.breaks().begin(),
             b.breaks().end(), std::back_inserter(grid));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  std::vector<Interval> out;
  auto add = [&](double lo, double hi) {
    if (!out.empty() && lo <= out.back().hi) {
      out.back().hi = std::max(out.back().hi, hi);
    } else {
      out.push_back({lo, hi});
    }
  };
  double prev_d = a(grid[0]) - b(grid[0]);
  if (prev_d <= tol) add(grid[0], grid[0]);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double y0 = grid[i - 1];
    const double y1 = grid[i];
    const double d = a(y1) - b(y1);
    const bool in0 = prev_d <= tol;
    const bool in1 = d <= tol;
    if (in0 && in1) {
      add(y0, y1);
    } else if (in0 != in1) {
      const double yc = y0 + (y1 - y0) * ((tol - prev_d) / (d - prev_d));
      if (in0) {
        add(y0, yc);
      } else {
        add(yc, y1);
      }
    }
    prev_d = d;
  }
  if (prev_d <= tol) add(grid.back(), kInf);
  return out;
}

bool in_region(std::span<const Interval> region, double y, double slack) {
  auto it = std::lower_bound(
      region.begin(), region.end(), y,
      [slack](const Interval& iv, double v) { return iv.hi + slack < v; });
  return it != region.end() && it->contains(y, slack);
}

}  // namespace shortfall
