#pragma once

// Admissibility conditions (H1)-(H5) for an annulus instance, plus the
// structural diagnostics that never gate the solver.

#include <optional>
#include <string>
#include <vector>

#include "lgp/boundary_data.hpp"
#include "lgp/geometry.hpp"

namespace lgp {

enum class Verdict { pass, warn, fail };

const char* to_string(Verdict v);

struct ConditionResult {
  Verdict verdict = Verdict::pass;
  std::vector<std::string> witnesses;

  void fail(std::string witness) {
    verdict = Verdict::fail;
    witnesses.push_back(std::move(witness));
  }
};

struct TvCheck {
  double tv_inner = 0.0;
  double tv_outer = 0.0;
  Verdict verdict = Verdict::pass;
};

TvCheck check_tv_inequality(const BoundaryFunction& g);

enum class FamilyKind { chi, gamma, flat };

// One paired family: mass leaves `sources` (part of spt f+) and arrives on
// `sinks` (part of spt f-). chi: outer increasing -> inner increasing. gamma:
// inner decreasing -> outer decreasing. flat: rising -> falling parts of a
// non-constant outer F arc.
struct ArcFamily {
  FamilyKind kind = FamilyKind::chi;
  std::size_t index = 0;  // 1-based within its kind
  std::vector<BoundaryArc> sources;
  std::vector<BoundaryArc> sinks;
  double total_variation = 0.0;

  std::string label() const;
};

struct Pairing {
  // Inner monotone arc j is paired with outer monotone arc (j + shift) mod k
  // in the decompositions' monotone order.
  std::size_t shift = 0;
  std::vector<ArcFamily> families;
  // Anchoring increasing arcs (indices into the increasing-arc lists).
  std::size_t outer_anchor = 0;
  std::size_t inner_anchor = 0;
};

struct H2Check {
  ConditionResult result;
  // Every cyclic shift consistent with (H2), in increasing shift order.
  std::vector<Pairing> pairings;
};

H2Check check_h2(const ArcDecomposition& outer, const ArcDecomposition& inner, const BoundaryFunction& g);

ConditionResult check_h3(const Annulus& annulus, const Pairing& pairing);

struct H4Margin {
  std::string family;
  double lhs = 0.0;
  double rhs = 0.0;
  bool vacuous = false;  // one of the complements is empty

  double margin() const { return rhs - lhs; }
};

struct H4Check {
  ConditionResult result;
  std::vector<H4Margin> margins;
};

H4Check check_h4(const Annulus& annulus, const Pairing& pairing);

struct H5Check {
  ConditionResult result;
  double constant = 0.0;  // +inf when no chi/gamma family exists
  Vec2 inner_point;
  Vec2 outer_point;
};

H5Check check_h5(const Annulus& annulus, const Pairing& pairing);

struct Diagnostics {
  std::size_t monotonicity_changes_inner = 0;
  // spt(f-+) cap spt(f--) on the inner curve.
  std::vector<Vec2> special_points;
};

Diagnostics diagnostics(const Annulus& annulus, const ArcDecomposition& inner);

struct AdmissibilityReport {
  TvCheck tv;
  ConditionResult h1, h2, h3, h4, h5;
  std::vector<H4Margin> h4_margins;
  double h5_constant = 0.0;
  Diagnostics diag;
  std::vector<std::string> warnings;
  ArcDecomposition outer_decomposition;
  ArcDecomposition inner_decomposition;
  std::optional<Pairing> pairing;
  std::size_t consistent_pairings = 0;

  // fail iff one of (H1)-(H4) fails; (H5) is reported separately.
  Verdict overall() const;
};

AdmissibilityReport check_admissibility(const Annulus& annulus, const BoundaryFunction& g);

}  // namespace lgp
