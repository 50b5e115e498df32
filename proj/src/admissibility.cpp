#include "lgp/admissibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lgp/error.hpp"

namespace lgp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

std::string fmt(Vec2 p) { return "(" + fmt(p.x) + ", " + fmt(p.y) + ")"; }

double tv_tolerance(const BoundaryFunction& g) {
  return kEpsMassRelative * std::max(1.0, g.outer().total_variation() + g.inner().total_variation());
}

std::vector<BoundaryArc> collect(const std::vector<ArcFamily>& families, std::size_t skip, bool sources) {
  std::vector<BoundaryArc> out;
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (i == skip) continue;
    const auto& arcs = sources ? families[i].sources : families[i].sinks;
    out.insert(out.end(), arcs.begin(), arcs.end());
  }
  return out;
}

}  // namespace

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "pass";
    case Verdict::warn:
      return "warn";
    case Verdict::fail:
      return "fail";
  }
  return "?";
}

std::string ArcFamily::label() const {
  const char* base = kind == FamilyKind::chi ? "chi" : (kind == FamilyKind::gamma ? "gamma" : "F");
  return base + std::to_string(index);
}

TvCheck check_tv_inequality(const BoundaryFunction& g) {
  TvCheck out;
  out.tv_inner = g.inner().total_variation();
  out.tv_outer = g.outer().total_variation();
  const double eps = kEpsMassRelative * std::max(1.0, out.tv_inner + out.tv_outer);
  out.verdict = out.tv_inner <= out.tv_outer + eps ? Verdict::pass : Verdict::fail;
  return out;
}

H2Check check_h2(const ArcDecomposition& outer, const ArcDecomposition& inner, const BoundaryFunction& g) {
  H2Check out;
  const double tol = tv_tolerance(g);

  for (std::size_t i = 0; i < inner.arcs.size(); ++i) {
    const auto& a = inner.arcs[i];
    if (a.kind == ArcKind::flat && !a.constant) {
      out.result.fail("inner flat arc at s = " + fmt(a.arc.s_start) + " is not constant");
    }
  }
  for (const auto& a : outer.arcs) {
    if (a.kind != ArcKind::flat || a.constant) continue;
    double net = 0.0;
    for (const auto& r : a.rising) net += total_variation(g.outer(), r);
    for (const auto& r : a.falling) net -= total_variation(g.outer(), r);
    if (std::fabs(net) > tol) {
      out.result.fail("outer flat arc at s = " + fmt(a.arc.s_start) + " carries net derivative mass " + fmt(net));
    }
  }

  const auto om = outer.monotone_indices();
  const auto im = inner.monotone_indices();
  const std::size_t oi = outer.count(ArcKind::increasing), od = outer.count(ArcKind::decreasing);
  const std::size_t ii = inner.count(ArcKind::increasing), id = inner.count(ArcKind::decreasing);
  if (oi != ii || od != id) {
    out.result.fail("outer has " + std::to_string(oi) + " increasing / " + std::to_string(od) +
                    " decreasing arcs, inner has " + std::to_string(ii) + " / " + std::to_string(id) +
                    "; TV(inner) = " + fmt(g.inner().total_variation()) +
                    " vs TV(outer) = " + fmt(g.outer().total_variation()));
    return out;
  }

  const std::size_t k = om.size();
  std::vector<std::size_t> shifts;
  if (k == 0) shifts.push_back(0);
  for (std::size_t t = 0; t < k; ++t) {
    bool ok = true;
    for (std::size_t j = 0; j < k && ok; ++j) {
      const auto& a = inner.arcs[im[j]];
      const auto& b = outer.arcs[om[(j + t) % k]];
      ok = a.kind == b.kind && std::fabs(a.total_variation - b.total_variation) <= tol;
    }
    if (ok) shifts.push_back(t);
  }
  if (shifts.empty()) {
    std::string w = "no cyclic pairing has equal total variations; outer arcs:";
    for (auto i : om) w += " " + std::string(to_string(outer.arcs[i].kind)) + " " + fmt(outer.arcs[i].total_variation);
    w += "; inner arcs:";
    for (auto i : im) w += " " + std::string(to_string(inner.arcs[i].kind)) + " " + fmt(inner.arcs[i].total_variation);
    out.result.fail(w);
    return out;
  }

  const auto outer_inc = outer.indices(ArcKind::increasing);
  const auto inner_inc = inner.indices(ArcKind::increasing);
  for (std::size_t t : shifts) {
    Pairing p;
    p.shift = t;
    std::size_t chi = 0, gamma = 0;
    for (std::size_t m = 0; m < k; ++m) {
      const std::size_t o = om[m];
      const std::size_t i = im[(m + k - t) % k];
      ArcFamily fam;
      fam.total_variation = outer.arcs[o].total_variation;
      if (outer.arcs[o].kind == ArcKind::increasing) {
        fam.kind = FamilyKind::chi;
        fam.index = ++chi;
        fam.sources = {outer.arcs[o].arc};
        fam.sinks = {inner.arcs[i].arc};
        if (outer_inc.front() == o) {
          p.outer_anchor = 0;
          p.inner_anchor = static_cast<std::size_t>(std::find(inner_inc.begin(), inner_inc.end(), i) - inner_inc.begin());
        }
      } else {
        fam.kind = FamilyKind::gamma;
        fam.index = ++gamma;
        fam.sources = {inner.arcs[i].arc};
        fam.sinks = {outer.arcs[o].arc};
      }
      p.families.push_back(std::move(fam));
    }
    std::size_t flat = 0;
    for (const auto& a : outer.arcs) {
      if (a.kind != ArcKind::flat || a.constant) continue;
      ArcFamily fam;
      fam.kind = FamilyKind::flat;
      fam.index = ++flat;
      fam.sources = a.rising;
      fam.sinks = a.falling;
      fam.total_variation = 0.5 * a.total_variation;
      p.families.push_back(std::move(fam));
    }
    std::stable_sort(p.families.begin(), p.families.end(),
                     [](const ArcFamily& a, const ArcFamily& b) { return a.kind < b.kind; });
    out.pairings.push_back(std::move(p));
  }
  return out;
}

ConditionResult check_h3(const Annulus& annulus, const Pairing& pairing) {
  ConditionResult out;
  const ConvexBoundary& outer = annulus.outer();
  const ConvexBoundary& inner = annulus.inner();
  for (const auto& fam : pairing.families) {
    bool ok = true;
    for (const auto& src : fam.sources) {
      for (const auto& dst : fam.sinks) {
        if (!ok) break;
        if (fam.kind == FamilyKind::flat) {
          // Chords of the outer curve: the hole may cut them anywhere.
          for (Vec2 p : arc_sample_points(outer, src)) {
            for (Vec2 q : arc_sample_points(outer, dst)) {
              if (!segment_in_closure(annulus, p, q)) {
                out.fail(fam.label() + ": segment " + fmt(p) + " -> " + fmt(q) + " crosses the hole");
                ok = false;
                break;
              }
            }
            if (!ok) break;
          }
          continue;
        }
        // One end on each curve. The outer region is convex and holds both
        // ends, so only the hole matters, and the segment avoids the hole iff
        // it starts out of the hole's tangent cone at the inner end.
        const BoundaryArc& in_arc = src.side == Side::inner ? src : dst;
        const BoundaryArc& out_arc = src.side == Side::inner ? dst : src;
        const auto in_s = arc_sample_arclengths(inner, in_arc);
        const auto out_pts = arc_sample_points(outer, out_arc);
        for (double s : in_s) {
          const Vec2 p = inner.point_at(s);
          for (Vec2 q : out_pts) {
            if (!leaves_without_entering(inner, s, q - p)) {
              out.fail(fam.label() + ": segment " + fmt(p) + " -> " + fmt(q) + " crosses the hole");
              ok = false;
              break;
            }
          }
          if (!ok) break;
        }
      }
    }
  }
  return out;
}

H4Check check_h4(const Annulus& annulus, const Pairing& pairing) {
  H4Check out;
  const auto& fams = pairing.families;
  for (std::size_t i = 0; i < fams.size(); ++i) {
    const auto other_src = collect(fams, i, true);
    const auto other_dst = collect(fams, i, false);
    H4Margin m;
    m.family = fams[i].label();
    const double d_st = arcs_max_distance(annulus, fams[i].sources, fams[i].sinks);
    if (other_src.empty() || other_dst.empty()) {
      m.vacuous = true;
      m.lhs = d_st;
      m.rhs = kInf;
      out.margins.push_back(m);
      continue;
    }
    m.lhs = d_st + arcs_max_distance(annulus, other_src, other_dst);
    m.rhs = arcs_min_distance(annulus, fams[i].sources, other_dst) + arcs_min_distance(annulus, fams[i].sinks, other_src);
    if (!(m.margin() > kEpsGeom)) {
      out.result.fail(m.family + ": " + fmt(m.lhs) + " is not below " + fmt(m.rhs));
    }
    out.margins.push_back(m);
  }
  return out;
}

H5Check check_h5(const Annulus& annulus, const Pairing& pairing) {
  H5Check out;
  out.constant = kInf;
  const ConvexBoundary& outer = annulus.outer();
  const ConvexBoundary& inner = annulus.inner();
  for (const auto& fam : pairing.families) {
    if (fam.kind == FamilyKind::flat) continue;
    const BoundaryArc& in_arc = fam.kind == FamilyKind::chi ? fam.sinks.front() : fam.sources.front();
    const BoundaryArc& out_arc = fam.kind == FamilyKind::chi ? fam.sources.front() : fam.sinks.front();
    const auto ys = arc_sample_points(outer, out_arc);
    for (double s : arc_sample_arclengths(inner, in_arc)) {
      const Vec2 x = inner.point_at(s);
      const Vec2 nu = inner.outward_normal(s);
      for (Vec2 y : ys) {
        const double v = dot(y - x, nu);
        if (v < out.constant) {
          out.constant = v;
          out.inner_point = x;
          out.outer_point = y;
        }
      }
    }
  }
  if (!(out.constant > kEpsGeom)) {
    out.result.fail("(y - x).nu(x) = " + fmt(out.constant) + " at x = " + fmt(out.inner_point) +
                    ", y = " + fmt(out.outer_point));
  }
  return out;
}

Diagnostics diagnostics(const Annulus& annulus, const ArcDecomposition& inner) {
  Diagnostics out;
  const auto mono = inner.monotone_indices();
  if (mono.size() > 1) {
    for (std::size_t m = 0; m < mono.size(); ++m) {
      if (inner.arcs[mono[m]].kind != inner.arcs[mono[(m + 1) % mono.size()]].kind) ++out.monotonicity_changes_inner;
    }
  }
  for (double s : inner.junctions) out.special_points.push_back(annulus.inner().point_at(s));
  return out;
}

Verdict AdmissibilityReport::overall() const {
  for (const ConditionResult* c : {&h1, &h2, &h3, &h4}) {
    if (c->verdict == Verdict::fail) return Verdict::fail;
  }
  bool warned = !warnings.empty();
  for (const ConditionResult* c : {&h1, &h2, &h3, &h4}) warned = warned || c->verdict == Verdict::warn;
  return warned ? Verdict::warn : Verdict::pass;
}

AdmissibilityReport check_admissibility(const Annulus& annulus, const BoundaryFunction& g) {
  AdmissibilityReport r;
  r.tv = check_tv_inequality(g);
  if (r.tv.verdict == Verdict::fail) {
    r.warnings.push_back("TV(inner) = " + fmt(r.tv.tv_inner) + " exceeds TV(outer) = " + fmt(r.tv.tv_outer) +
                         "; no solution can exist");
  }
  for (Side side : {Side::outer, Side::inner}) {
    if (!std::isfinite(g.component(side).total_variation())) {
      r.h1.fail(std::string(to_string(side)) + " data has infinite variation");
    }
  }

  r.inner_decomposition = decompose_monotone(g.inner(), Side::inner);
  // Regrouping into non-flat F arcs needs families to sit between; with a
  // monotone-free inner trace every outer variation is unmatched.
  std::optional<DecompositionTarget> target;
  if (!r.inner_decomposition.monotone_indices().empty()) {
    target = DecompositionTarget{r.inner_decomposition.count(ArcKind::increasing),
                                 r.inner_decomposition.count(ArcKind::decreasing)};
  }
  try {
    r.outer_decomposition = decompose_monotone(g.outer(), Side::outer, target);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::decomposition_ambiguous) throw;
    r.outer_decomposition = decompose_monotone(g.outer(), Side::outer);
    r.h2.fail(e.what());
  }
  r.diag = diagnostics(annulus, r.inner_decomposition);

  for (const auto* dec : {&r.outer_decomposition, &r.inner_decomposition}) {
    if (const std::size_t n = dec->empty_flat_count(); n > 0) {
      r.warnings.push_back(std::string(to_string(dec->side)) + " boundary: " + std::to_string(n) +
                           " monotone arc junction(s) with an empty flat part");
    }
  }

  H2Check h2 = check_h2(r.outer_decomposition, r.inner_decomposition, g);
  if (r.h2.verdict != Verdict::fail) r.h2 = h2.result;
  else r.h2.witnesses.insert(r.h2.witnesses.end(), h2.result.witnesses.begin(), h2.result.witnesses.end());
  r.consistent_pairings = h2.pairings.size();

  if (r.h2.verdict == Verdict::fail || h2.pairings.empty()) {
    r.h2.verdict = Verdict::fail;
    for (ConditionResult* c : {&r.h3, &r.h4, &r.h5}) {
      c->verdict = Verdict::warn;
      c->witnesses.push_back("not evaluated: no (H2) pairing");
    }
    r.h5_constant = 0.0;
    return r;
  }

  r.pairing = h2.pairings.front();
  r.h3 = check_h3(annulus, *r.pairing);
  H4Check h4 = check_h4(annulus, *r.pairing);
  r.h4 = h4.result;
  r.h4_margins = h4.margins;
  H5Check h5 = check_h5(annulus, *r.pairing);
  r.h5 = h5.result;
  r.h5_constant = h5.constant;

  if (h2.pairings.size() > 1) {
    std::string w = std::to_string(h2.pairings.size()) + " cyclic pairings satisfy (H2); using shift " +
                    std::to_string(r.pairing->shift);
    for (std::size_t i = 1; i < h2.pairings.size(); ++i) {
      if (check_h4(annulus, h2.pairings[i]).result.verdict != r.h4.verdict) {
        w += "; (H4) verdict differs for shift " + std::to_string(h2.pairings[i].shift);
      }
    }
    r.warnings.push_back(w);
  }
  return r;
}

}  // namespace lgp
