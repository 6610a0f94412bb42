"""Sequential importance sampling for perfect matchings of band bipartite graphs."""
