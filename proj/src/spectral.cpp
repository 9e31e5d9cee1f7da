#include "jtwpa/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace jtwpa {

using constants::pi;
using constants::two_pi;
using cplxd = std::complex<double>;

namespace {

int smallest_factor(int n) {
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) return p;
  return n;
}

// Recursive mixed-radix Cooley-Tukey, unnormalized forward transform.
std::vector<cplxd> fft_rec(const std::vector<cplxd>& in) {
  const int n = int(in.size());
  if (n == 1) return in;
  const int p = smallest_factor(n);
  const int m = n / p;

  std::vector<std::vector<cplxd>> sub(p);
  for (int r = 0; r < p; ++r) {
    sub[r].resize(m);
    for (int j = 0; j < m; ++j) sub[r][j] = in[size_t(j) * p + r];
    sub[r] = fft_rec(sub[r]);
  }

  std::vector<cplxd> out(n);
  for (int q = 0; q < n; ++q) {
    cplxd acc = 0.0;
    for (int r = 0; r < p; ++r)
      acc += sub[r][q % m] * std::polar(1.0, -two_pi * double(q) * r / n);
    out[q] = acc;
  }
  return out;
}

// Incrementally rotated single-bin accumulation, resynchronized periodically
// to keep the twiddle error at machine level.
cplxd bin_sum(std::span<const double> x, int q) {
  const int m = int(x.size());
  const double w = -two_pi * q / m;
  cplxd acc = 0.0;
  cplxd rot = 1.0;
  const cplxd step = std::polar(1.0, w);
  for (int tau = 0; tau < m; ++tau) {
    if (tau % 1024 == 0) rot = std::polar(1.0, w * tau);
    acc += x[tau] * rot;
    rot *= step;
  }
  return acc;
}

int grid_bin(double f, double df, const char* what) {
  double q = f / df;
  double qr = std::round(q);
  if (std::abs(q - qr) > 1e-6)
    throw GridAlignmentError(std::string(what) + " at " + std::to_string(f) +
                             " Hz does not sit on the DFT grid");
  return int(qr);
}

}  // namespace

std::vector<cplxd> dft_forward(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("dft_forward: empty series");
  std::vector<cplxd> in(x.begin(), x.end());
  std::vector<cplxd> out = fft_rec(in);
  const double scale = 1.0 / double(x.size());
  for (auto& v : out) v *= scale;
  return out;
}

cplxd dft_bin(std::span<const double> x, int q) {
  if (x.empty()) throw std::invalid_argument("dft_bin: empty series");
  return bin_sum(x, q) / double(x.size());
}

SpectralFrame dft(const TransientTrace& trace, std::span<const int> bins) {
  SpectralFrame frame;
  frame.df = trace.df();
  frame.samples = trace.samples;
  frame.nodes = trace.nodes;
  frame.bins.assign(bins.begin(), bins.end());
  frame.V.resize(bins.size());
  frame.I.resize(bins.size());

  const int m = trace.samples;
  std::vector<cplxd> twiddle(m);
  for (size_t b = 0; b < bins.size(); ++b) {
    int q = bins[b];
    if (q < 0 || q >= m)
      throw std::invalid_argument("dft: bin index out of range");
    for (int tau = 0; tau < m; ++tau)
      twiddle[tau] = std::polar(1.0 / m, -two_pi * double(q) * tau / m);
    frame.V[b].resize(trace.nodes.size());
    frame.I[b].resize(trace.nodes.size());
    for (size_t r = 0; r < trace.nodes.size(); ++r) {
      cplxd av = 0.0, ai = 0.0;
      const double* pv = trace.v[r].data();
      const double* pi_ = trace.i[r].data();
      for (int tau = 0; tau < m; ++tau) {
        av += pv[tau] * twiddle[tau];
        ai += pi_[tau] * twiddle[tau];
      }
      frame.V[b][r] = av;
      frame.I[b][r] = ai;
    }
  }
  return frame;
}

ToneField extract_tone(const TransientTrace& trace, double f,
                       const std::string& label) {
  const double df = trace.df();
  int q = grid_bin(f, df, label.c_str());
  std::vector<int> bins{q};
  SpectralFrame frame = dft(trace, bins);

  ToneField tone;
  tone.label = label;
  tone.freq = f;
  tone.bin = q;
  tone.nodes = trace.nodes;
  const double fac = (q == 0) ? 1.0 : 2.0;  // peak phasor for q > 0
  tone.V.resize(trace.nodes.size());
  tone.I.resize(trace.nodes.size());
  tone.P.resize(trace.nodes.size());
  for (size_t r = 0; r < trace.nodes.size(); ++r) {
    tone.V[r] = fac * frame.V[0][r];
    tone.I[r] = fac * frame.I[0][r];
    tone.P[r] = 0.5 * std::real(tone.V[r] * std::conj(tone.I[r]));
  }
  return tone;
}

std::vector<ToneField> extract_tones(const TransientTrace& trace, double fp,
                                     double fs) {
  const double df = trace.df();
  const double fi = fp - fs;
  if (!(fs > 0.0) || !(fi > 0.0))
    throw std::invalid_argument("extract_tones: need 0 < fs < fp");

  struct Request {
    const char* label;
    double f;
  };
  const Request requests[] = {{"s", fs},        {"i", fi},
                              {"p", fp},        {"p+s", fp + fs},
                              {"p+i", fp + fi}, {"2p", 2.0 * fp}};

  std::vector<int> bins;
  for (const auto& rq : requests) bins.push_back(grid_bin(rq.f, df, rq.label));

  SpectralFrame frame = dft(trace, bins);
  std::vector<ToneField> tones(std::size(requests));
  for (size_t tn = 0; tn < std::size(requests); ++tn) {
    ToneField& tone = tones[tn];
    tone.label = requests[tn].label;
    tone.freq = requests[tn].f;
    tone.bin = bins[tn];
    tone.nodes = trace.nodes;
    const double fac = (tone.bin == 0) ? 1.0 : 2.0;
    tone.V.resize(trace.nodes.size());
    tone.I.resize(trace.nodes.size());
    tone.P.resize(trace.nodes.size());
    for (size_t r = 0; r < trace.nodes.size(); ++r) {
      tone.V[r] = fac * frame.V[tn][r];
      tone.I[r] = fac * frame.I[tn][r];
      tone.P[r] = 0.5 * std::real(tone.V[r] * std::conj(tone.I[r]));
    }
  }
  // bin collisions (degenerate 3WM): signal/idler, and then p+s/p+i
  if (tones[0].bin == tones[1].bin) {
    tones[0].degenerate = tones[1].degenerate = true;
    tones[3].degenerate = tones[4].degenerate = true;
  }
  return tones;
}

PortWaves s_parameters(const ToneField& tone, double Z0, int input_node,
                       int output_node) {
  auto idx = [&](int node) {
    auto it = std::find(tone.nodes.begin(), tone.nodes.end(), node);
    if (it == tone.nodes.end())
      throw std::invalid_argument("s_parameters: node not present in tone field");
    return size_t(it - tone.nodes.begin());
  };
  const size_t in = idx(input_node);
  const size_t out = idx(output_node);
  cplxd denom = tone.V[in] + Z0 * tone.I[in];
  double scale = std::abs(tone.V[in]) + Z0 * std::abs(tone.I[in]);
  if (!(std::abs(denom) > 1e-12 * scale) || scale == 0.0)
    throw std::runtime_error("s_parameters: degenerate drive, no incident wave at " +
                             tone.label);
  return {(tone.V[in] - Z0 * tone.I[in]) / denom, 2.0 * tone.V[out] / denom};
}

double transducer_gain_db(cplxd s21) { return 20.0 * std::log10(std::abs(s21)); }

double incident_power(const ToneField& tone, double Z0, int input_node) {
  auto it = std::find(tone.nodes.begin(), tone.nodes.end(), input_node);
  if (it == tone.nodes.end())
    throw std::invalid_argument("incident_power: node not present in tone field");
  size_t in = size_t(it - tone.nodes.begin());
  double amp = std::abs(tone.V[in] + Z0 * tone.I[in]);
  return amp * amp / (8.0 * Z0);
}

HarmonicConversion harmonic_conversion(const TransientTrace& trace, double fp) {
  HarmonicConversion hc;
  ToneField pump = extract_tone(trace, fp, "p");
  hc.incident_pump = incident_power(pump, trace.Z0, 1);

  const int out_node = trace.total_nodes;
  const size_t out = size_t(trace.index_of(out_node));
  const double df = trace.df();
  const int qp = grid_bin(fp, df, "pump");
  std::vector<double> per_node(trace.nodes.size(), 0.0);
  for (int j = 2; j * qp < trace.samples / 2; ++j) {
    ToneField h = extract_tone(trace, j * qp * df, "harmonic");
    for (size_t r = 0; r < per_node.size(); ++r)
      per_node[r] += std::abs(h.P[r]);
    hc.harmonics_out += std::abs(h.P[out]);
  }
  double peak = *std::max_element(per_node.begin(), per_node.end());
  hc.fraction = peak / hc.incident_pump;
  hc.fraction_out = hc.harmonics_out / hc.incident_pump;
  return hc;
}

namespace {

std::vector<double> log_envelope(const ToneField& tone) {
  std::vector<double> le(tone.P.size());
  for (size_t n = 0; n < tone.P.size(); ++n)
    le[n] = 0.5 * std::log(std::max(std::abs(tone.P[n]), 1e-300));
  return le;
}

std::vector<double> moving_average(const std::vector<double>& x, int window) {
  std::vector<double> out(x.size());
  int half = window / 2;
  for (size_t j = 0; j < x.size(); ++j) {
    size_t lo = (j >= size_t(half)) ? j - half : 0;
    size_t hi = std::min(x.size() - 1, j + half);
    double acc = 0.0;
    for (size_t k = lo; k <= hi; ++k) acc += x[k];
    out[j] = acc / double(hi - lo + 1);
  }
  return out;
}

}  // namespace

GrowthFit fit_growth(const ToneField& signal, const ToneField& idler) {
  GrowthFit fit;
  if (signal.degenerate || idler.degenerate) {
    fit.rejected = true;
    fit.reason = "degenerate tones cannot be separated";
    return fit;
  }
  const size_t count = signal.P.size();
  if (count < 100 || idler.P.size() != count)
    throw std::invalid_argument("fit_growth: need full per-node tone fields");

  const std::vector<double> ls = log_envelope(signal);
  const std::vector<double> li = log_envelope(idler);
  const size_t n_min = 25;  // skip the region where sinh(gn) ~ 0

  // rms misfit of both envelopes against {ln cosh, ln|sinh|} at gain g,
  // with the per-tone amplitude eliminated analytically
  auto objective = [&](double g) {
    double sum_sq = 0.0;
    size_t m = 0;
    auto accumulate = [&](const std::vector<double>& le, bool idler_model) {
      double off_sum = 0.0;
      std::vector<double> dev(count - n_min);
      for (size_t n = n_min; n < count; ++n) {
        double gn = g * double(n);
        double model =
            idler_model
                ? (gn + std::log1p(-std::exp(-2.0 * gn)) - std::log(2.0))
                : (gn + std::log1p(std::exp(-2.0 * gn)) - std::log(2.0));
        dev[n - n_min] = le[n] - model;
        off_sum += dev[n - n_min];
      }
      double off = off_sum / double(dev.size());
      for (double d : dev) {
        sum_sq += (d - off) * (d - off);
        ++m;
      }
    };
    accumulate(ls, false);
    accumulate(li, true);
    return std::sqrt(sum_sq / double(m));
  };

  // golden-section search on g
  double lo = 1e-6, hi = 0.05;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = objective(x1), f2 = objective(x2);
  for (int it = 0; it < 80; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = objective(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = objective(x2);
    }
  }
  fit.g = 0.5 * (a + b);
  fit.residual = objective(fit.g);

  // recover the amplitude prefactors at the fitted g
  {
    double off_s = 0.0, off_i = 0.0;
    size_t m = 0;
    for (size_t n = n_min; n < count; ++n) {
      double gn = fit.g * double(n);
      off_s += ls[n] - (gn + std::log1p(std::exp(-2.0 * gn)) - std::log(2.0));
      off_i += li[n] - (gn + std::log1p(-std::exp(-2.0 * gn)) - std::log(2.0));
      ++m;
    }
    fit.amp_signal = std::exp(off_s / double(m));
    fit.amp_idler = std::exp(off_i / double(m));
  }

  const double total_growth = ls[count - 1] - ls[n_min];
  if (total_growth < 0.69) {  // ~6 dB, growth model ill-conditioned below
    fit.rejected = true;
    fit.reason = "insufficient growth for a reliable fit";
    return fit;
  }
  if (fit.residual > 0.4) {
    fit.rejected = true;
    fit.reason = "envelope deviates strongly from the cosh/sinh model";
    return fit;
  }
  // smoothed envelope must not fall back on itself (undulating transfer)
  std::vector<double> smooth = moving_average(ls, 81);
  for (size_t j = n_min; j < smooth.size(); ++j) {
    size_t hi_n = std::min(smooth.size() - 1, j + 300);
    double drop = 0.0;
    for (size_t k = j; k <= hi_n; ++k) drop = std::max(drop, smooth[j] - smooth[k]);
    if (drop > 0.35) {  // ~3 dB fallback
      fit.rejected = true;
      fit.reason = "non-monotone signal envelope";
      return fit;
    }
  }
  return fit;
}

double beating_period(const ToneField& tone) {
  // evanescent tones carry an oscillating through-power; the envelope lives
  // in |P_n|. A 20-cell boxcar removes the loading-period micro-structure
  // before peak picking.
  std::vector<double> mag(tone.P.size());
  for (size_t n = 0; n < mag.size(); ++n) mag[n] = std::abs(tone.P[n]);
  const std::vector<double> p = moving_average(mag, 20);

  std::vector<size_t> candidates;
  for (size_t n = 1; n + 1 < p.size(); ++n)
    if (p[n] > p[n - 1] && p[n] >= p[n + 1]) candidates.push_back(n);

  // keep peaks with at least ~1.8 dB prominence against the valleys
  // separating them from stronger neighbors
  std::vector<size_t> order(candidates);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return p[a] > p[b]; });
  std::vector<size_t> kept;
  for (size_t cand : order) {
    bool prominent = true;
    for (size_t other : kept) {
      size_t lo = std::min(cand, other), hi = std::max(cand, other);
      double valley = *std::min_element(p.begin() + lo, p.begin() + hi + 1);
      if (!(p[cand] > 1.5 * valley)) {
        prominent = false;
        break;
      }
    }
    if (prominent) kept.push_back(cand);
  }
  if (kept.size() < 3)
    throw std::runtime_error("beating_period: fewer than 3 envelope maxima");
  std::sort(kept.begin(), kept.end());
  std::vector<double> spacing;
  for (size_t j = 1; j < kept.size(); ++j)
    spacing.push_back(double(tone.nodes[kept[j]]) - double(tone.nodes[kept[j - 1]]));
  std::sort(spacing.begin(), spacing.end());
  size_t n = spacing.size();
  return (n % 2 == 1) ? spacing[n / 2]
                      : 0.5 * (spacing[n / 2 - 1] + spacing[n / 2]);
}

}  // namespace jtwpa
