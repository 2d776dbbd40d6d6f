#include "migedu/hierarchy.hpp"

#include "migedu/error.hpp"
#include "text.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace migedu {

namespace {

std::optional<double> optional_number(std::string_view raw, std::string_view column, std::size_t line_no) {
    if (raw.empty() || raw == "NA") {
        return std::nullopt;
    }
    const auto value = text::parse_double(raw);
    if (!value || *value < 0.0 || !std::isfinite(*value)) {
        throw ValidationError("hierarchy line " + std::to_string(line_no) + ": invalid " + std::string(column) +
                              " '" + std::string(raw) + "'");
    }
    return value;
}

Urban parse_urban(std::string_view raw, std::size_t line_no) {
    if (raw.empty() || raw == "Unknown") {
        return Urban::Unknown;
    }
    if (raw == "Urban" || raw == "U" || raw == "urban") {
        return Urban::Urban;
    }
    if (raw == "Rural" || raw == "R" || raw == "rural") {
        return Urban::Rural;
    }
    throw ValidationError("hierarchy line " + std::to_string(line_no) + ": invalid urban value '" +
                          std::string(raw) + "'");
}

void derive_density(Region &region, const std::optional<double> &supplied) {
    std::optional<double> derived;
    if (region.area_km2 && region.population && *region.area_km2 > 0.0) {
        derived = *region.population / *region.area_km2;
    }
    if (supplied && derived) {
        const double scale = std::max(std::abs(*derived), std::abs(*supplied));
        if (scale > 0.0 && std::abs(*derived - *supplied) / scale >= 1e-9) {
            throw ValidationError("region " + region.id + ": supplied density " + std::to_string(*supplied) +
                                  " disagrees with population/area " + std::to_string(*derived));
        }
    }
    region.density = supplied ? supplied : derived;
}

} // namespace

RegionIndex RegionHierarchy::add_major(std::string id, std::optional<double> area_km2,
                                       std::optional<double> population, Urban urban) {
    if (major_index_.contains(id)) {
        throw ValidationError("duplicate major region id: " + id);
    }
    const auto index = static_cast<RegionIndex>(majors_.size());
    major_index_.emplace(id, index);
    majors_.push_back(Region{std::move(id), Scale::Major, kUnknownRegion, area_km2, population, std::nullopt, urban});
    return index;
}

RegionIndex RegionHierarchy::add_minor(std::string id, std::string_view parent_major_id,
                                       std::optional<double> area_km2, std::optional<double> population,
                                       Urban urban) {
    if (minor_index_.contains(id)) {
        throw ValidationError("duplicate minor region id: " + id);
    }
    const auto parent = find(Scale::Major, parent_major_id);
    if (!parent) {
        throw ValidationError("minor region " + id + " has unknown parent '" + std::string(parent_major_id) + "'");
    }
    const auto index = static_cast<RegionIndex>(minors_.size());
    minor_index_.emplace(id, index);
    minors_.push_back(Region{std::move(id), Scale::Minor, *parent, area_km2, population, std::nullopt, urban});
    return index;
}

void RegionHierarchy::finalize(const std::vector<std::optional<double>> &supplied_minor_density,
                               const std::vector<std::optional<double>> &supplied_major_density) {
    std::vector<double> area_sum(majors_.size(), 0.0);
    std::vector<double> pop_sum(majors_.size(), 0.0);
    std::vector<bool> area_complete(majors_.size(), true);
    std::vector<bool> pop_complete(majors_.size(), true);
    std::vector<bool> has_children(majors_.size(), false);
    for (const auto &minor : minors_) {
        const auto p = static_cast<std::size_t>(minor.parent);
        has_children[p] = true;
        if (minor.area_km2) {
            area_sum[p] += *minor.area_km2;
        } else {
            area_complete[p] = false;
        }
        if (minor.population) {
            pop_sum[p] += *minor.population;
        } else {
            pop_complete[p] = false;
        }
    }
    for (std::size_t i = 0; i < majors_.size(); ++i) {
        if (!has_children[i]) {
            continue;
        }
        if (!majors_[i].area_km2 && area_complete[i]) {
            majors_[i].area_km2 = area_sum[i];
        }
        if (!majors_[i].population && pop_complete[i]) {
            majors_[i].population = pop_sum[i];
        }
    }
    for (std::size_t i = 0; i < minors_.size(); ++i) {
        derive_density(minors_[i], i < supplied_minor_density.size() ? supplied_minor_density[i] : std::nullopt);
    }
    for (std::size_t i = 0; i < majors_.size(); ++i) {
        derive_density(majors_[i], i < supplied_major_density.size() ? supplied_major_density[i] : std::nullopt);
    }
}

RegionHierarchy RegionHierarchy::read_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ValidationError("hierarchy file is empty");
    }
    const auto header = text::split(line, ',');
    auto column = [&](std::string_view name, bool required) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return static_cast<int>(i);
            }
        }
        if (required) {
            throw ValidationError("hierarchy file lacks column " + std::string(name));
        }
        return -1;
    };
    const int c_id = column("region_id", true);
    const int c_level = column("level", true);
    const int c_parent = column("parent_id", true);
    const int c_area = column("area_km2", true);
    const int c_pop = column("population", true);
    const int c_density = column("density", false);
    const int c_urban = column("urban", false);

    struct Row {
        std::string id, parent;
        Scale level;
        std::optional<double> area, population, density;
        Urban urban;
    };
    std::vector<Row> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) {
            continue;
        }
        const auto cells = text::split(line, ',');
        if (cells.size() != header.size()) {
            throw ValidationError("hierarchy line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(header.size()) + " fields");
        }
        Row row;
        row.id = std::string(cells[c_id]);
        if (row.id.empty()) {
            throw ValidationError("hierarchy line " + std::to_string(line_no) + ": empty region_id");
        }
        const auto level = cells[c_level];
        if (level == "minor") {
            row.level = Scale::Minor;
        } else if (level == "major") {
            row.level = Scale::Major;
        } else {
            throw ValidationError("hierarchy line " + std::to_string(line_no) + ": level must be minor or major");
        }
        row.parent = std::string(cells[c_parent]);
        row.area = optional_number(cells[c_area], "area_km2", line_no);
        row.population = optional_number(cells[c_pop], "population", line_no);
        row.density = c_density >= 0 ? optional_number(cells[c_density], "density", line_no) : std::nullopt;
        row.urban = c_urban >= 0 ? parse_urban(cells[c_urban], line_no) : Urban::Unknown;
        if (row.level == Scale::Minor && row.parent.empty()) {
            throw ValidationError("minor region " + row.id + " has no parent");
        }
        rows.push_back(std::move(row));
    }

    RegionHierarchy h;
    std::vector<std::optional<double>> major_density;
    std::vector<std::optional<double>> minor_density;
    for (auto &row : rows) {
        if (row.level == Scale::Major) {
            h.add_major(row.id, row.area, row.population, row.urban);
            major_density.push_back(row.density);
        }
    }
    for (auto &row : rows) {
        if (row.level == Scale::Minor) {
            h.add_minor(row.id, row.parent, row.area, row.population, row.urban);
            minor_density.push_back(row.density);
        }
    }
    if (h.majors_.empty()) {
        throw ValidationError("hierarchy defines no major regions");
    }
    h.finalize(minor_density, major_density);
    return h;
}

RegionHierarchy RegionHierarchy::load_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read hierarchy file " + path.string());
    }
    return read_csv(in);
}

void RegionHierarchy::write_csv(std::ostream &out) const {
    out << "region_id,level,parent_id,area_km2,population,urban\n";
    auto number = [](const std::optional<double> &v) { return v ? text::format_double(*v) : std::string(); };
    auto urban = [](Urban u) { return u == Urban::Unknown ? std::string() : std::string(name_of(u)); };
    for (const auto &r : majors_) {
        out << r.id << ",major,," << number(r.area_km2) << ',' << number(r.population) << ',' << urban(r.urban)
            << '\n';
    }
    for (const auto &r : minors_) {
        out << r.id << ",minor," << majors_[static_cast<std::size_t>(r.parent)].id << ',' << number(r.area_km2)
            << ',' << number(r.population) << ',' << urban(r.urban) << '\n';
    }
}

std::optional<RegionIndex> RegionHierarchy::find(Scale level, std::string_view id) const {
    const auto &index = level == Scale::Minor ? minor_index_ : major_index_;
    const auto it = index.find(id);
    if (it == index.end()) {
        return std::nullopt;
    }
    return it->second;
}

const Region &RegionHierarchy::region(Scale level, RegionIndex index) const {
    return regions(level).at(static_cast<std::size_t>(index));
}

} // namespace migedu
