#pragma once

#include "migedu/categories.hpp"
#include "migedu/record.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace migedu {

struct Region {
    std::string id;
    Scale level = Scale::Major;
    /// Major parent index for minor regions.
    RegionIndex parent = kUnknownRegion;
    std::optional<double> area_km2;
    std::optional<double> population;
    /// persons / km²; derived from population and area unless supplied.
    std::optional<double> density;
    Urban urban = Urban::Unknown;
};

/// Minor→major nesting with per-region area, population, and density.
/// A hierarchy without minor regions runs in major-only mode.
class RegionHierarchy {
  public:
    RegionIndex add_major(std::string id, std::optional<double> area_km2 = std::nullopt,
                          std::optional<double> population = std::nullopt, Urban urban = Urban::Unknown);
    RegionIndex add_minor(std::string id, std::string_view parent_major_id,
                          std::optional<double> area_km2 = std::nullopt,
                          std::optional<double> population = std::nullopt, Urban urban = Urban::Unknown);

    /// Fills missing major area/population from their minors and derives densities.
    /// Throws ValidationError when a supplied density disagrees with
    /// population/area by 1e-9 relative or more.
    void finalize(const std::vector<std::optional<double>> &supplied_minor_density = {},
                  const std::vector<std::optional<double>> &supplied_major_density = {});

    /// Reads CSV with columns region_id, level, parent_id, area_km2, population
    /// and optional density, urban.
    static RegionHierarchy read_csv(std::istream &in);
    static RegionHierarchy load_csv(const std::filesystem::path &path);
    void write_csv(std::ostream &out) const;

    [[nodiscard]] std::optional<RegionIndex> find(Scale level, std::string_view id) const;
    [[nodiscard]] const Region &region(Scale level, RegionIndex index) const;
    [[nodiscard]] const std::vector<Region> &regions(Scale level) const {
        return level == Scale::Minor ? minors_ : majors_;
    }
    [[nodiscard]] std::size_t count(Scale level) const { return regions(level).size(); }
    [[nodiscard]] RegionIndex parent_of(RegionIndex minor) const { return minors_.at(minor).parent; }
    [[nodiscard]] bool nested() const { return !minors_.empty(); }
    [[nodiscard]] bool has_scale(Scale level) const { return !regions(level).empty(); }

  private:
    struct StringHash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept { return std::hash<std::string_view>{}(s); }
    };
    using IndexMap = std::unordered_map<std::string, RegionIndex, StringHash, std::equal_to<>>;

    std::vector<Region> minors_;
    std::vector<Region> majors_;
    IndexMap minor_index_;
    IndexMap major_index_;
};

} // namespace migedu
