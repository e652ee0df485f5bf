#pragma once
/*
bvh.hpp
-------
Binary bounding-volume hierarchy over AABBs: linear (Morton-ordered) build,
in-place refit and exact point-containment queries. It stands in for the
opaque acceleration structure of ray-tracing hardware, where a "point ray"
reports every leaf box containing its origin.

Layout: nodes are emitted in pre-order, so every child has a larger index
than its parent and refit is a single reverse sweep. Leaves hold exactly one
primitive each.
*/

#include "geometry.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mochi {

struct BvhNode {
    static constexpr index_t kLeaf = ~index_t{0};

    Aabb bounds;
    // internal: both children; leaf: left holds the primitive, right == kLeaf
    index_t left = 0;
    index_t right = kLeaf;

    bool is_leaf() const { return right == kLeaf; }
    index_t primitive() const { return left; }

    bool operator==(const BvhNode&) const = default;
};

namespace detail {

// Spreads the low 10 bits of v so there are two zero bits between each.
inline std::uint32_t expand_bits(std::uint32_t v) {
    v &= 0x3ffu;
    v = (v | (v << 16)) & 0x030000ffu;
    v = (v | (v << 8)) & 0x0300f00fu;
    v = (v | (v << 4)) & 0x030c30c3u;
    v = (v | (v << 2)) & 0x09249249u;
    return v;
}

inline std::uint32_t quantize(real value, real lo, real extent) {
    if (!(extent > 0)) return 0;
    const real t = (value - lo) / extent * real(1024);
    if (!(t > 0)) return 0;
    if (t >= real(1023)) return 1023;
    return static_cast<std::uint32_t>(t);
}

}  // namespace detail

/// 30-bit Morton code (10 bits per axis) of `p` within `frame`.
inline std::uint32_t morton_code(const Vec3& p, const Aabb& frame) {
    const Vec3 e = frame.extent();
    const std::uint32_t x = detail::quantize(p.x, frame.min.x, e.x);
    const std::uint32_t y = detail::quantize(p.y, frame.min.y, e.y);
    const std::uint32_t z = detail::quantize(p.z, frame.min.z, e.z);
    return (detail::expand_bits(x) << 2) | (detail::expand_bits(y) << 1) | detail::expand_bits(z);
}

class Bvh {
public:
    Bvh() = default;

    /// Linear BVH over `boxes`. Throws on empty or invalid input.
    static Bvh build(std::span<const Aabb> boxes) {
        if (boxes.empty()) throw std::invalid_argument("Bvh::build: no boxes");
        for (const Aabb& b : boxes) {
            if (!is_valid(b)) throw std::invalid_argument("Bvh::build: invalid box");
        }
        if (boxes.size() >= std::size_t{BvhNode::kLeaf} / 2) {
            throw std::invalid_argument("Bvh::build: too many primitives");
        }

        const auto n = static_cast<index_t>(boxes.size());
        Aabb frame = Aabb::empty();
        for (const Aabb& b : boxes) frame.extend(b.centroid());

        std::vector<std::uint32_t> codes(n);
        for (index_t i = 0; i < n; ++i) codes[i] = morton_code(boxes[i].centroid(), frame);

        std::vector<index_t> order(n);
        std::iota(order.begin(), order.end(), index_t{0});
        // equal codes keep original index order
        std::sort(order.begin(), order.end(), [&](index_t a, index_t b) {
            return codes[a] != codes[b] ? codes[a] < codes[b] : a < b;
        });
        std::vector<std::uint32_t> sorted(n);
        for (index_t k = 0; k < n; ++k) sorted[k] = codes[order[k]];

        Bvh bvh;
        bvh.count_ = n;
        bvh.nodes_.resize(2 * std::size_t{n} - 1);

        struct Task {
            index_t first, last, node, depth;
        };
        std::vector<Task> tasks;
        tasks.push_back({0, n - 1, 0, 1});
        index_t depth = 1;
        while (!tasks.empty()) {
            const Task t = tasks.back();
            tasks.pop_back();
            depth = std::max(depth, t.depth);
            BvhNode& node = bvh.nodes_[t.node];
            if (t.first == t.last) {
                node.left = order[t.first];
                node.right = BvhNode::kLeaf;
                continue;
            }
            const index_t split = find_split(sorted, t.first, t.last);
            // pre-order: left subtree fills [node+1, right), right subtree follows
            const index_t left = t.node + 1;
            const index_t right = left + 2 * (split - t.first + 1) - 1;
            node.left = left;
            node.right = right;
            tasks.push_back({split + 1, t.last, right, t.depth + 1});
            tasks.push_back({t.first, split, left, t.depth + 1});
        }
        bvh.depth_ = depth;
        bvh.refit(boxes);
        return bvh;
    }

    /// Replaces leaf bounds with `boxes` and recomputes internal bounds
    /// bottom-up. Topology is unchanged.
    void refit(std::span<const Aabb> boxes) {
        if (boxes.size() != count_) {
            throw std::invalid_argument("Bvh::refit: box count does not match primitive count");
        }
        for (std::size_t k = nodes_.size(); k-- > 0;) {
            BvhNode& node = nodes_[k];
            if (node.is_leaf()) {
                node.bounds = boxes[node.primitive()];
            } else {
                node.bounds = merge(nodes_[node.left].bounds, nodes_[node.right].bounds);
            }
        }
    }

    /// Calls `on_hit(primitive)` for every leaf box containing `q`, in
    /// traversal order. Returns the number of nodes visited.
    template <class OnHit>
    std::size_t for_each_hit(const Vec3& q, OnHit&& on_hit) const {
        if (nodes_.empty()) return 0;
        if (depth_ < kInlineStack) {
            std::array<index_t, kInlineStack> stack;
            return traverse(q, stack.data(), on_hit);
        }
        std::vector<index_t> stack(depth_ + 1);
        return traverse(q, stack.data(), on_hit);
    }

    /// Every primitive whose box contains `q`, ascending.
    std::vector<index_t> query_point(const Vec3& q) const {
        std::vector<index_t> hits;
        for_each_hit(q, [&](index_t prim) { hits.push_back(prim); });
        std::sort(hits.begin(), hits.end());
        return hits;
    }

    const std::vector<BvhNode>& nodes() const { return nodes_; }
    index_t root() const { return 0; }
    std::size_t primitive_count() const { return count_; }
    std::size_t depth() const { return depth_; }
    bool empty() const { return nodes_.empty(); }

    Aabb bounds() const { return nodes_.empty() ? Aabb::empty() : nodes_[0].bounds; }

    bool same_topology(const Bvh& other) const {
        if (count_ != other.count_ || nodes_.size() != other.nodes_.size()) return false;
        for (std::size_t k = 0; k < nodes_.size(); ++k) {
            if (nodes_[k].left != other.nodes_[k].left || nodes_[k].right != other.nodes_[k].right) {
                return false;
            }
        }
        return true;
    }

private:
    static constexpr std::size_t kInlineStack = 64;

    // Karras-style split: last index sharing the longest common prefix with
    // `first`. Runs of identical codes fall back to the midpoint.
    static index_t find_split(const std::vector<std::uint32_t>& codes, index_t first, index_t last) {
        const std::uint32_t a = codes[first];
        const std::uint32_t b = codes[last];
        if (a == b) return first + (last - first) / 2;
        const int prefix = std::countl_zero(a ^ b);
        index_t split = first;
        index_t step = last - first;
        do {
            step = (step + 1) >> 1;
            const index_t candidate = split + step;
            if (candidate < last && std::countl_zero(a ^ codes[candidate]) > prefix) {
                split = candidate;
            }
        } while (step > 1);
        return split;
    }

    template <class OnHit>
    std::size_t traverse(const Vec3& q, index_t* stack, OnHit& on_hit) const {
        std::size_t visited = 0;
        std::size_t top = 0;
        stack[top++] = 0;
        while (top > 0) {
            const BvhNode& node = nodes_[stack[--top]];
            ++visited;
            if (!point_in_aabb(q, node.bounds)) continue;
            if (node.is_leaf()) {
                on_hit(node.primitive());
            } else {
                stack[top++] = node.right;
                stack[top++] = node.left;
            }
        }
        return visited;
    }

    std::vector<BvhNode> nodes_;
    std::size_t count_ = 0;
    std::size_t depth_ = 0;
};

/// Copying form of Bvh::refit.
inline Bvh refit(Bvh bvh, std::span<const Aabb> boxes) {
    bvh.refit(boxes);
    return bvh;
}

/// Brute-force containment scan; the reference for query_point.
inline std::vector<index_t> linear_scan(std::span<const Aabb> boxes, const Vec3& q) {
    std::vector<index_t> hits;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (point_in_aabb(q, boxes[i])) hits.push_back(static_cast<index_t>(i));
    }
    return hits;
}

}  // namespace mochi
