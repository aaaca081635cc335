#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace poi {

// The eight place categories, in fixed alphabetical order. The integer value
// of each enumerator is its stable class index.
enum class CategoryLabel : int {
  kArtsEntertainment = 0,
  kCollegeUniversity = 1,
  kFood = 2,
  kGreatOutdoors = 3,
  kNightlifeSpot = 4,
  kProfessionalOtherPlaces = 5,
  kShopService = 6,
  kTravelTransport = 7,
};

inline constexpr int kNumCategories = 8;

inline constexpr std::array<CategoryLabel, kNumCategories> all_categories() {
  return {CategoryLabel::kArtsEntertainment,      CategoryLabel::kCollegeUniversity,
          CategoryLabel::kFood,                   CategoryLabel::kGreatOutdoors,
          CategoryLabel::kNightlifeSpot,          CategoryLabel::kProfessionalOtherPlaces,
          CategoryLabel::kShopService,            CategoryLabel::kTravelTransport};
}

inline constexpr int category_index(CategoryLabel c) { return static_cast<int>(c); }

inline CategoryLabel category_from_index(int i) {
  if (i < 0 || i >= kNumCategories)
    throw std::out_of_range("category index out of range: " + std::to_string(i));
  return static_cast<CategoryLabel>(i);
}

// Display names as they appear in the corpus files.
inline std::string_view category_name(CategoryLabel c) {
  static constexpr std::array<std::string_view, kNumCategories> kNames = {
      "Arts & Entertainment", "College & University",
      "Food",                 "Great Outdoors",
      "Nightlife Spot",       "Professional & Other Places",
      "Shop & Service",       "Travel & Transport"};
  return kNames[static_cast<std::size_t>(category_index(c))];
}

// Compact identifier form, used in file names and code-facing output.
inline std::string_view category_id(CategoryLabel c) {
  static constexpr std::array<std::string_view, kNumCategories> kIds = {
      "ArtsEntertainment", "CollegeUniversity", "Food",        "GreatOutdoors",
      "NightlifeSpot",     "ProfessionalOtherPlaces", "ShopService", "TravelTransport"};
  return kIds[static_cast<std::size_t>(category_index(c))];
}

// Accepts either the display name or the compact identifier. "Residence" is
// rejected by name: the task covers the eight categories above only.
inline CategoryLabel parse_category(std::string_view s) {
  for (CategoryLabel c : all_categories()) {
    if (s == category_name(c) || s == category_id(c)) return c;
  }
  if (s == "Residence")
    throw std::runtime_error("category \"Residence\" is excluded from the task");
  throw std::runtime_error("unknown category \"" + std::string(s) + "\"");
}

}  // namespace poi
