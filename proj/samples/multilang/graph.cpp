#include <vector>
#include "graph/node.hpp"

namespace graph {

// Adjacency list.
class Graph {
public:
    void add(int a, int b) { adj_[a].push_back(b); }
private:
    std::vector<std::vector<int>> adj_;
};

/* Degree of a node. */
int degree(const Graph& g, int v) {
    return 0;
}

}  // namespace graph
