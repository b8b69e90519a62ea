// SPDX-License-Identifier: Apache-2.0
#include "tcsi/categories.hpp"

#include <cctype>

namespace tcsi {

namespace {

struct CategoryInfo {
  std::string_view enum_name;
  std::string_view display;
  std::string_view short_name;
  std::string_view title;
};

constexpr std::array<CategoryInfo, kCategoryCount> kInfo = {{
    {"FirstPartyCollection", "First Party Collection", "First", "How your data is collected"},
    {"PermissionAcquisition", "Permission Acquisition", "Permission",
     "What permissions are requested"},
    {"ThirdPartySharing", "Third Party Sharing", "Third",
     "How your data is shared with third parties"},
    {"Usage", "Usage", "Usage", "How your data is used"},
    {"DataRetention", "Data Retention", "Retention", "How long your data is kept"},
    {"DataSecurity", "Data Security", "Security", "How your data is protected"},
    {"EditControl", "Edit/Control", "Control", "How you can control your data"},
    {"SpecificAudiences", "Specific Audiences", "Specific", "Rules for specific audiences"},
    {"ContactInformation", "Contact Information", "Contact", "How to contact the provider"},
    {"PolicyChange", "Policy Change", "Change", "How policy changes are communicated"},
    {"CeaseOperation", "Cease Operation", "Cease", "What happens if the service shuts down"},
}};

const CategoryInfo& info(DataPracticeCategory c) { return kInfo[static_cast<std::size_t>(c)]; }

std::string fold(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    if (ch == ' ' || ch == '-' || ch == '_' || ch == '/') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return out;
}

}  // namespace

bool is_classifiable(DataPracticeCategory c) { return classifiable_index(c).has_value(); }

std::optional<std::size_t> classifiable_index(DataPracticeCategory c) {
  for (std::size_t i = 0; i < kClassifiableTopics.size(); ++i) {
    if (kClassifiableTopics[i] == c) return i;
  }
  return std::nullopt;
}

std::string_view enum_name(DataPracticeCategory c) { return info(c).enum_name; }
std::string_view display_name(DataPracticeCategory c) { return info(c).display; }
std::string_view short_name(DataPracticeCategory c) { return info(c).short_name; }
std::string_view section_title(DataPracticeCategory c) { return info(c).title; }

std::optional<DataPracticeCategory> parse_category(std::string_view name) {
  const std::string key = fold(name);
  if (key.empty()) return std::nullopt;
  for (auto c : kAllCategories) {
    const auto& i = info(c);
    if (key == fold(i.enum_name) || key == fold(i.display) || key == fold(i.short_name)) return c;
  }
  // A few spellings seen in policy-annotation tooling.
  if (key == "firstparty") return DataPracticeCategory::FirstPartyCollection;
  if (key == "thirdparty" || key == "thirdpartysharingdisclosure")
    return DataPracticeCategory::ThirdPartySharing;
  if (key == "edit") return DataPracticeCategory::EditControl;
  return std::nullopt;
}

std::string_view task_name(Task t) {
  switch (t) {
    case Task::Importance: return "Importance";
    case Task::Topic: return "Topic";
    case Task::Risk: return "Risk";
    case Task::Sensitivity: return "Sensitivity";
    case Task::Rewrite: return "Rewrite";
  }
  return "?";
}

std::optional<Task> parse_task(std::string_view name) {
  const std::string key = fold(name);
  for (auto t : {Task::Importance, Task::Topic, Task::Risk, Task::Sensitivity, Task::Rewrite}) {
    if (key == fold(task_name(t))) return t;
  }
  if (key == "important") return Task::Importance;
  if (key == "sensitive") return Task::Sensitivity;
  return std::nullopt;
}

}  // namespace tcsi
