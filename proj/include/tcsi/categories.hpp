// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace tcsi {

/// Data-practice category (topic) of a policy sentence. Enumeration order is
/// significant: it is the tie-break order for topic argmax.
enum class DataPracticeCategory {
  FirstPartyCollection,
  PermissionAcquisition,
  ThirdPartySharing,
  Usage,
  DataRetention,
  DataSecurity,
  EditControl,
  SpecificAudiences,
  ContactInformation,
  PolicyChange,
  CeaseOperation,
};

inline constexpr std::size_t kCategoryCount = 11;

inline constexpr std::array<DataPracticeCategory, kCategoryCount> kAllCategories = {
    DataPracticeCategory::FirstPartyCollection, DataPracticeCategory::PermissionAcquisition,
    DataPracticeCategory::ThirdPartySharing,    DataPracticeCategory::Usage,
    DataPracticeCategory::DataRetention,        DataPracticeCategory::DataSecurity,
    DataPracticeCategory::EditControl,          DataPracticeCategory::SpecificAudiences,
    DataPracticeCategory::ContactInformation,   DataPracticeCategory::PolicyChange,
    DataPracticeCategory::CeaseOperation,
};

// Topics the classifier predicts over. The two sparse categories
// (PermissionAcquisition, CeaseOperation) are excluded.
inline constexpr std::size_t kClassifiableCount = 9;

inline constexpr std::array<DataPracticeCategory, kClassifiableCount> kClassifiableTopics = {
    DataPracticeCategory::FirstPartyCollection, DataPracticeCategory::ThirdPartySharing,
    DataPracticeCategory::Usage,                DataPracticeCategory::DataRetention,
    DataPracticeCategory::DataSecurity,         DataPracticeCategory::EditControl,
    DataPracticeCategory::SpecificAudiences,    DataPracticeCategory::ContactInformation,
    DataPracticeCategory::PolicyChange,
};

bool is_classifiable(DataPracticeCategory c);

/// Position of `c` in kClassifiableTopics, or nullopt for the excluded ones.
std::optional<std::size_t> classifiable_index(DataPracticeCategory c);

/// "FirstPartyCollection"
std::string_view enum_name(DataPracticeCategory c);
/// "First Party Collection"
std::string_view display_name(DataPracticeCategory c);
/// Short row label used in the corpus statistics table ("First", "Third", ...).
std::string_view short_name(DataPracticeCategory c);
/// Fixed English section heading used in rendered summaries.
std::string_view section_title(DataPracticeCategory c);

/// Accepts enum form, display form, and the short table aliases,
/// case-insensitively. Separators (space, '-', '_', '/') are ignored.
std::optional<DataPracticeCategory> parse_category(std::string_view name);

/// The five sub-tasks. Topic/Risk/Sensitivity/Importance are classification
/// heads; Rewrite is the generation head.
enum class Task { Importance, Topic, Risk, Sensitivity, Rewrite };

inline constexpr std::array<Task, 4> kClassificationTasks = {Task::Importance, Task::Topic,
                                                            Task::Risk, Task::Sensitivity};

std::string_view task_name(Task t);
std::optional<Task> parse_task(std::string_view name);

}  // namespace tcsi
