#pragma once

#include <filesystem>

#include "skgraph/config.hpp"
#include "skgraph/palette.hpp"
#include "skgraph/skgraph.hpp"

namespace skg {

/// Everything a query needs: the graph plus the extraction configuration
/// and palette the descriptors were produced with.
struct Index {
    FeatureConfig feat;
    Palette palette;
    SKGraph graph;
};

/// Binary index container, version 1: 8-byte magic, explicit little-endian
/// integers, IEEE-754 doubles. Save/load round-trips are byte-identical.
void save_index(const Index& index, const std::filesystem::path& path);
Index load_index(const std::filesystem::path& path);

}  // namespace skg
