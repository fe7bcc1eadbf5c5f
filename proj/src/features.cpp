#include "gmwstn/features.hpp"

#include <algorithm>
#include <string>

#include "gmwstn/error.hpp"

namespace gmwstn {

FeatureLayout::FeatureLayout(const std::vector<std::vector<std::size_t>>& shapes, std::span<const int> layers)
{
    if (layers.empty()) throw ConfigError("at least one scattering layer must be selected");
    std::vector<int> sorted(layers.begin(), layers.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (int m : sorted) {
        if (m < 0 || static_cast<std::size_t>(m) >= shapes.size())
            throw ConfigError("layer " + std::to_string(m) + " requested but the network has " +
                              std::to_string(shapes.size() - 1) + " layers");
        Block block;
        block.layer = m;
        block.shape = shapes[static_cast<std::size_t>(m)];
        block.offset = size_;
        block.size = 1;
        for (auto d : block.shape) block.size *= d;
        size_ += block.size;
        blocks_.push_back(std::move(block));
    }
}

const FeatureLayout::Block* FeatureLayout::find(int layer) const noexcept
{
    for (const auto& b : blocks_)
        if (b.layer == layer) return &b;
    return nullptr;
}

FeatureEntry FeatureLayout::at(std::size_t position) const
{
    if (position >= size_) throw ConfigError("feature position out of range");
    const auto it = std::find_if(blocks_.begin(), blocks_.end(), [&](const Block& b) {
        return position >= b.offset && position < b.offset + b.size;
    });
    const std::size_t local = position - it->offset;
    const std::size_t paths = it->size / it->shape.front();
    FeatureEntry entry;
    entry.layer = it->layer;
    entry.time = local / paths;
    std::size_t rem = local % paths;
    std::size_t stride = paths;
    for (std::size_t axis = 1; axis < it->shape.size(); ++axis) {
        stride /= it->shape[axis];
        entry.path.push_back(static_cast<int>(rem / stride));
        rem %= stride;
    }
    return entry;
}

std::vector<int> layers_for_depth(int depth, bool cumulative)
{
    if (depth < 0) throw ConfigError("layer depth must be >= 0");
    if (!cumulative) return {depth};
    std::vector<int> layers(static_cast<std::size_t>(depth) + 1);
    for (int m = 0; m <= depth; ++m) layers[static_cast<std::size_t>(m)] = m;
    return layers;
}

std::vector<std::vector<std::size_t>> output_shapes(const ScatteringOutput& out)
{
    std::vector<std::vector<std::size_t>> shapes{{out.layer0.size()}};
    for (const auto& t : out.layers) shapes.push_back(t.shape);
    return shapes;
}

FeatureVector flatten(const ScatteringOutput& out, std::span<const int> layers)
{
    FeatureVector fv;
    fv.layout = FeatureLayout(output_shapes(out), layers);
    fv.values.reserve(fv.layout.size());
    for (const auto& block : fv.layout.blocks()) {
        const auto& src = block.layer == 0 ? out.layer0 : out.layers[static_cast<std::size_t>(block.layer - 1)].data;
        fv.values.insert(fv.values.end(), src.begin(), src.end());
    }
    return fv;
}

}  // namespace gmwstn
