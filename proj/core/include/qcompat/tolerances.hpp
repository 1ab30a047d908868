#pragma once

namespace qcompat {

// One configuration record threaded through all modules. Defaults are chosen
// for dense double-precision arithmetic at dimensions up to a few hundred.
struct Tolerances {
  double herm = 1e-10;      // max-abs deviation from self-adjointness
  double iso = 1e-10;       // max-abs residual of V^dag V - I
  double psd = 1e-9;        // admissible negative eigenvalue on an effect
  double povm_sum = 1e-9;   // max-abs residual of sum(effects) - I
  double sdp = 1e-8;        // solver residual / relative-gap target
  double rank_rel = 1e-11;  // relative singular-value threshold for ranks
  double commute = 1e-9;    // cross matrix elements in algebraic reductions
  double scalar_red = 1e-8; // ||V^dag A V - lambda I|| in scalar reductions

  // Feasibility/compatibility verdicts are decided outside the band
  // [-band, band] around the margin; inside the band results stay honest
  // ("undecided") instead of being forced to a side.
  double verdict_band() const { return 10.0 * sdp; }
};

inline const Tolerances& default_tolerances() {
  static const Tolerances tol{};
  return tol;
}

}  // namespace qcompat
