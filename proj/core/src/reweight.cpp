#include "qwem/reweight.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qwem/error.hpp"

namespace qwem {

bool ReweightConfig::has(ReweightScheme s) const {
  return std::find(schemes.begin(), schemes.end(), s) != schemes.end();
}

bool ReweightConfig::symmetric() const { return !has(ReweightScheme::kNegsample); }

namespace {

const char* scheme_name(ReweightScheme s) {
  switch (s) {
    case ReweightScheme::kUnit: return "unit";
    case ReweightScheme::kSetting1: return "setting1";
    case ReweightScheme::kDynamicWindow: return "dynwindow";
    case ReweightScheme::kSubsample: return "subsample";
    case ReweightScheme::kNegsample: return "negsample";
  }
  return "?";
}

}  // namespace

std::string ReweightConfig::describe() const {
  std::ostringstream ss;
  for (std::size_t k = 0; k < schemes.size(); ++k) {
    if (k) ss << '+';
    ss << scheme_name(schemes[k]);
  }
  if (has(ReweightScheme::kNegsample))
    ss << "(k=" << negsample_k << ",exp=" << negsample_exponent << ")";
  return ss.str();
}

ReweightConfig parse_reweight(const std::string& text) {
  ReweightConfig config;
  config.schemes.clear();
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '+')) {
    if (part == "unit") {
      config.schemes.push_back(ReweightScheme::kUnit);
    } else if (part == "setting1") {
      config.schemes.push_back(ReweightScheme::kSetting1);
    } else if (part == "dynwindow" || part == "dynamic_window") {
      config.schemes.push_back(ReweightScheme::kDynamicWindow);
    } else if (part == "subsample") {
      config.schemes.push_back(ReweightScheme::kSubsample);
    } else if (part == "negsample") {
      config.schemes.push_back(ReweightScheme::kNegsample);
    } else {
      throw UsageError("unknown reweighting scheme: '" + part +
                       "' (expected unit|setting1|dynwindow|subsample|negsample, "
                       "joined with '+')");
    }
  }
  if (config.schemes.empty()) throw UsageError("empty reweighting specification");
  return config;
}

Reweighting::Reweighting(const ReweightConfig& config, const SkipGramStats& stats)
    : config_(config), L_(stats.L) {
  const std::uint32_t V = stats.V;
  p_word_.resize(V);
  for (std::uint32_t i = 0; i < V; ++i) p_word_[i] = stats.unigram_p(i);

  if (config_.has(ReweightScheme::kSubsample)) {
    p_acc_.resize(V);
    for (std::uint32_t i = 0; i < V; ++i)
      p_acc_[i] = p_word_[i] > 0.0 ? subsample_acceptance(p_word_[i]) : 1.0;
  }

  if (config_.has(ReweightScheme::kNegsample)) {
    neg_weight_.resize(V);
    double sum = 0.0;
    for (std::uint32_t i = 0; i < V; ++i) {
      neg_weight_[i] =
          p_word_[i] > 0.0 ? std::pow(p_word_[i], config_.negsample_exponent - 1.0) : 0.0;
      sum += neg_weight_[i];
    }
    neg_norm_ = sum / static_cast<double>(V);
    if (neg_norm_ <= 0.0) throw DataError("negsample normalizer vanished (empty unigram?)");
  }

  if (config_.has(ReweightScheme::kDynamicWindow)) {
    // sum over ordered pairs of (L - d_ij) P_ij; off-diagonal cells carry both
    // orientations.
    double norm = 0.0;
    for (const auto& c : stats.cells) {
      if (c.sep_sum == 0 && c.count == 0) continue;
      const double mult = (c.i == c.j) ? 1.0 : 2.0;
      const double p = static_cast<double>(c.count) / static_cast<double>(stats.pair_total);
      norm += mult * (static_cast<double>(L_) - stats.mean_sep(c)) * p;
    }
    if (norm <= 0.0)
      throw DataError("dynamic-window normalizer vanished (missing separation sums?)");
    dyn_norm_ = norm;
  }

  // Classify G_ij = psi+ P_ij + psi- P_i P_j. UNIT factors are neutral.
  std::vector<ReweightScheme> active;
  for (auto s : config_.schemes)
    if (s != ReweightScheme::kUnit) active.push_back(s);
  const bool has_s1 = std::count(active.begin(), active.end(), ReweightScheme::kSetting1) == 1;
  const bool only_s1_and_subsample =
      std::all_of(active.begin(), active.end(), [](ReweightScheme s) {
        return s == ReweightScheme::kSetting1 || s == ReweightScheme::kSubsample;
      });
  if (has_s1 && only_s1_and_subsample) {
    if (active.size() == 1) {
      g_kind_ = GKind::kConstant;
      g_constant_ = 1.0;
    } else {
      // psi+ = psi- = (prod of per-word acceptances) / (P_ij + P_i P_j)
      // => G_ij = u_i u_j with u the elementwise product of acceptance factors.
      g_kind_ = GKind::kRankOne;
      g_vec_.assign(V, 1.0);
      for (auto s : active) {
        if (s == ReweightScheme::kSubsample)
          for (std::uint32_t i = 0; i < V; ++i) g_vec_[i] *= p_acc_[i];
      }
    }
  } else {
    g_kind_ = GKind::kGeneral;
  }
}

double Reweighting::psi_pos(std::uint32_t i, std::uint32_t j, double p_ij,
                            double d_ij) const {
  double psi = 1.0;
  for (auto s : config_.schemes) {
    switch (s) {
      case ReweightScheme::kUnit:
        break;
      case ReweightScheme::kSetting1: {
        const double denom = p_ij + p_word_[i] * p_word_[j];
        psi *= denom > 0.0 ? 1.0 / denom : 0.0;
        break;
      }
      case ReweightScheme::kDynamicWindow:
        psi *= p_ij > 0.0 ? (static_cast<double>(L_) - d_ij) / dyn_norm_ : 0.0;
        break;
      case ReweightScheme::kSubsample:
        psi *= p_acc_[i] * p_acc_[j];
        break;
      case ReweightScheme::kNegsample:
        break;  // negative-side factor only
    }
  }
  return psi;
}

double Reweighting::psi_neg(std::uint32_t i, std::uint32_t j, double p_ij) const {
  double psi = 1.0;
  for (auto s : config_.schemes) {
    switch (s) {
      case ReweightScheme::kUnit:
        break;
      case ReweightScheme::kSetting1: {
        const double denom = p_ij + p_word_[i] * p_word_[j];
        psi *= denom > 0.0 ? 1.0 / denom : 0.0;
        break;
      }
      case ReweightScheme::kDynamicWindow:
        break;  // positive-side factor only
      case ReweightScheme::kSubsample:
        psi *= p_acc_[i] * p_acc_[j];
        break;
      case ReweightScheme::kNegsample:
        psi *= config_.negsample_k * neg_weight_[j] / neg_norm_;
        break;
    }
  }
  return psi;
}

double Reweighting::negsample_tilt(std::uint32_t j) const {
  return p_word_[j] > 0.0 ? std::pow(p_word_[j], config_.negsample_exponent) : 0.0;
}

}  // namespace qwem
