#include "evmod/kdtree.hpp"

#include <algorithm>
#include <numeric>

namespace evmod {

namespace {

// Heap ordering: the worst candidate (largest distance, then largest index)
// sits on top so it can be evicted first.
struct WorseFirst {
    bool operator()(const std::pair<double, std::uint32_t>& a,
                    const std::pair<double, std::uint32_t>& b) const {
        return a < b;
    }
};

}  // namespace

KdTree::KdTree(const Eigen::MatrixXd& points) : points_(points) {
    const std::uint32_t n = std::uint32_t(points.rows());
    if (n == 0) return;
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    nodes_.reserve(n);
    root_ = build(order.data(), order.data() + n, 0);
}

std::int32_t KdTree::build(std::uint32_t* begin, std::uint32_t* end, int depth) {
    if (begin == end) return -1;
    const int axis = depth % int(points_.cols());
    std::uint32_t* mid = begin + (end - begin) / 2;
    std::nth_element(begin, mid, end, [&](std::uint32_t a, std::uint32_t b) {
        double va = points_(a, axis), vb = points_(b, axis);
        return va < vb || (va == vb && a < b);
    });

    Node node;
    node.point = *mid;
    node.axis = std::uint8_t(axis);
    std::int32_t id = std::int32_t(nodes_.size());
    nodes_.push_back(node);
    std::int32_t left = build(begin, mid, depth + 1);
    std::int32_t right = build(mid + 1, end, depth + 1);
    nodes_[std::size_t(id)].left = left;
    nodes_[std::size_t(id)].right = right;
    return id;
}

void KdTree::search(std::int32_t node_id, std::uint32_t query, std::size_t k,
                    std::vector<std::pair<double, std::uint32_t>>& heap) const {
    if (node_id < 0) return;
    const Node& node = nodes_[std::size_t(node_id)];

    if (node.point != query) {
        double d2 = (points_.row(node.point) - points_.row(query)).squaredNorm();
        std::pair<double, std::uint32_t> cand{d2, node.point};
        if (heap.size() < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), WorseFirst{});
        } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end(), WorseFirst{});
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), WorseFirst{});
        }
    }

    double delta = points_(query, node.axis) - points_(node.point, node.axis);
    std::int32_t near = delta < 0 ? node.left : node.right;
    std::int32_t far = delta < 0 ? node.right : node.left;

    search(near, query, k, heap);
    // Descend the far side unless the splitting plane is strictly farther than
    // the current worst candidate; equal distances must still be visited so
    // index tie-breaks stay exact.
    if (heap.size() < k || delta * delta <= heap.front().first) {
        search(far, query, k, heap);
    }
}

std::vector<std::uint32_t> KdTree::nearest(std::uint32_t query_row, std::size_t k) const {
    std::vector<std::pair<double, std::uint32_t>> heap;
    heap.reserve(k + 1);
    search(root_, query_row, k, heap);
    std::sort_heap(heap.begin(), heap.end(), WorseFirst{});
    std::vector<std::uint32_t> out;
    out.reserve(heap.size());
    for (const auto& [d2, idx] : heap) out.push_back(idx);
    return out;
}

}  // namespace evmod
