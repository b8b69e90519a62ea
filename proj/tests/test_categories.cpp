#include <doctest.h>

#include <set>
#include <string>

#include "tcsi/categories.hpp"

using namespace tcsi;

TEST_CASE("every category round-trips through all its spellings") {
  for (auto c : kAllCategories) {
    CHECK(parse_category(enum_name(c)) == c);
    CHECK(parse_category(display_name(c)) == c);
    CHECK(parse_category(short_name(c)) == c);
    CHECK_FALSE(section_title(c).empty());
  }
}

TEST_CASE("parsing ignores case and separators") {
  CHECK(parse_category("data security") == DataPracticeCategory::DataSecurity);
  CHECK(parse_category("DATA_SECURITY") == DataPracticeCategory::DataSecurity);
  CHECK(parse_category("edit/control") == DataPracticeCategory::EditControl);
  CHECK(parse_category("third-party-sharing") == DataPracticeCategory::ThirdPartySharing);
  CHECK_FALSE(parse_category("").has_value());
  CHECK_FALSE(parse_category("Marketing").has_value());
}

TEST_CASE("the classifiable subset excludes the two sparse categories") {
  CHECK(kClassifiableTopics.size() == 9);
  CHECK_FALSE(is_classifiable(DataPracticeCategory::PermissionAcquisition));
  CHECK_FALSE(is_classifiable(DataPracticeCategory::CeaseOperation));
  CHECK_FALSE(classifiable_index(DataPracticeCategory::CeaseOperation).has_value());
  for (std::size_t i = 0; i < kClassifiableCount; ++i) {
    CHECK(classifiable_index(kClassifiableTopics[i]) == i);
  }
  // Subset keeps enumeration order, which is the argmax tie-break order.
  for (std::size_t i = 1; i < kClassifiableCount; ++i) {
    CHECK(static_cast<int>(kClassifiableTopics[i - 1]) < static_cast<int>(kClassifiableTopics[i]));
  }
}

TEST_CASE("section titles are distinct") {
  std::set<std::string> titles;
  for (auto c : kAllCategories) titles.insert(std::string(section_title(c)));
  CHECK(titles.size() == kCategoryCount);
}

TEST_CASE("task names") {
  for (auto t : {Task::Importance, Task::Topic, Task::Risk, Task::Sensitivity, Task::Rewrite}) {
    CHECK(parse_task(task_name(t)) == t);
  }
  CHECK_FALSE(parse_task("Summary").has_value());
}
