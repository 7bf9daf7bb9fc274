#pragma once

#include <string>
#include <vector>

#include "wats/basis.hpp"
#include "wats/error.hpp"

namespace wats {

// One subject's observed trajectory. Times are a subset of the design grid,
// sorted, and always include the baseline time.
struct SubjectRecord {
  std::string id;
  int group = 0;
  std::vector<double> times;
  std::vector<double> values;

  int n_obs() const { return static_cast<int>(times.size()); }
};

// Probabilities that a subject's last observed time is t*_j, j = 2..m.
struct DropoutLaw {
  std::vector<double> probs;  // indexed by j-2; size m-1

  void validate() const;
};

class LongitudinalDataset {
 public:
  LongitudinalDataset(TimeGrid grid, std::vector<std::string> group_labels,
                      std::vector<SubjectRecord> subjects);

  const TimeGrid& grid() const { return grid_; }
  int n_groups() const { return static_cast<int>(group_labels_.size()); }
  const std::vector<std::string>& group_labels() const { return group_labels_; }
  const std::vector<SubjectRecord>& subjects() const { return subjects_; }

  std::vector<int> subject_indices(int group) const;
  int group_size(int group) const;

  // True when every subject observes every design time.
  bool complete() const;

 private:
  TimeGrid grid_;
  std::vector<std::string> group_labels_;
  std::vector<SubjectRecord> subjects_;
};

}  // namespace wats
