#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

namespace evmod {

// Static kd-tree over the rows of a point matrix (any dimension up to a small
// handful; the pipeline uses 3 or 4). Queries return exact k-nearest results
// under the ordering (squared distance, index), so ties are broken by the
// smaller row index and results match a brute-force scan bit for bit.
class KdTree {
  public:
    explicit KdTree(const Eigen::MatrixXd& points);

    // k nearest rows to `query_row`, excluding the query itself, sorted by
    // (squared distance, index) ascending.
    std::vector<std::uint32_t> nearest(std::uint32_t query_row, std::size_t k) const;

  private:
    struct Node {
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t point = 0;
        std::uint8_t axis = 0;
    };

    std::int32_t build(std::uint32_t* begin, std::uint32_t* end, int depth);
    void search(std::int32_t node, std::uint32_t query, std::size_t k,
                std::vector<std::pair<double, std::uint32_t>>& heap) const;

    const Eigen::MatrixXd& points_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;
};

}  // namespace evmod
