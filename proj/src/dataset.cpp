#include "wats/dataset.hpp"

#include <cmath>

namespace wats {

void DropoutLaw::validate() const {
  if (probs.empty()) throw SpecError("DropoutLaw: empty law");
  double total = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw SpecError("DropoutLaw: negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw SpecError("DropoutLaw: probabilities must sum to 1");
}

LongitudinalDataset::LongitudinalDataset(TimeGrid grid, std::vector<std::string> group_labels,
                                         std::vector<SubjectRecord> subjects)
    : grid_(std::move(grid)),
      group_labels_(std::move(group_labels)),
      subjects_(std::move(subjects)) {
  if (group_labels_.empty()) throw SpecError("LongitudinalDataset: no group labels");
  for (const auto& s : subjects_) {
    if (s.group < 0 || s.group >= n_groups())
      throw SpecError("LongitudinalDataset: subject '" + s.id + "' has an unknown group");
    if (s.times.size() != s.values.size())
      throw SpecError("LongitudinalDataset: times/values length mismatch for '" + s.id + "'");
    if (s.times.empty() || s.times.front() != grid_.first())
      throw SpecError("LongitudinalDataset: subject '" + s.id + "' is missing the baseline");
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : s.times) {
      if (grid_.index_of(t) < 0)
        throw SpecError("LongitudinalDataset: time off the design grid for '" + s.id + "'");
      if (!(t > prev))
        throw SpecError("LongitudinalDataset: unsorted or duplicate times for '" + s.id + "'");
      prev = t;
    }
    for (double v : s.values) {
      if (!std::isfinite(v))
        throw SpecError("LongitudinalDataset: non-finite value for '" + s.id + "'");
    }
  }
}

std::vector<int> LongitudinalDataset::subject_indices(int group) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    if (subjects_[i].group == group) out.push_back(static_cast<int>(i));
  }
  return out;
}

int LongitudinalDataset::group_size(int group) const {
  return static_cast<int>(subject_indices(group).size());
}

bool LongitudinalDataset::complete() const {
  for (const auto& s : subjects_) {
    if (s.n_obs() != grid_.size()) return false;
  }
  return true;
}

}  // namespace wats
