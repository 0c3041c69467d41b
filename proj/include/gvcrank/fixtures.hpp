#pragma once

#include <string>
#include <vector>

#include "gvcrank/network.hpp"
#include "gvcrank/table.hpp"

namespace gvcrank {

/// Six-firm toy supply network for visibility experiments. A single distant
/// hub (firm 6) is the sole supplier of four intermediaries (firms 2-5), each
/// of which delivers an equal share to the downstream producer (firm 1).
/// With uniform alpha = 1/2 and damping chi, the scores for firm 1 have the
/// closed forms
///   v[2 -> 1](chi) = chi / 8          (one hop, share 1/4)
///   v[6 -> 1](chi) = chi^2 / 4        (four two-hop paths)
/// so the one-hop supplier outranks the hub below chi = 1/2 and the hub wins
/// above it: exactly the pattern where limited visibility of the network
/// overweights proximate suppliers.
struct ToySupplyNetwork {
    std::vector<std::string> sectors;
    Matrix G;
    Vector alpha;
    Eigen::Index downstream;      // firm 1
    Eigen::Index near_supplier;   // firm 2, one hop from firm 1
    Eigen::Index far_supplier;    // firm 6, two hops via four parallel routes
};

inline ToySupplyNetwork toy_supply_network() {
    ToySupplyNetwork net;
    net.sectors = {"firm1", "firm2", "firm3", "firm4", "firm5", "firm6"};
    net.G = Matrix::Zero(6, 6);
    for (Eigen::Index s = 1; s <= 4; ++s) {
        net.G(s, 0) = 0.25;  // firms 2..5 each supply a quarter of firm 1's bundle
        net.G(5, s) = 1.0;   // firm 6 is their sole supplier
    }
    net.alpha = Vector::Constant(6, 0.5);
    net.downstream = 0;
    net.near_supplier = 1;
    net.far_supplier = 5;
    return net;
}

/// Three-sector toy table; rows satisfy the gross-output identity exactly.
inline RawIOTable toy_three_sector_table() {
    RawIOTable table;
    table.sectors = {"s1", "s2", "s3"};
    table.flows.resize(3, 3);
    table.flows << 0, 2, 0,
                   1, 0, 1,
                   0, 3, 0;
    table.final_demand = Vector(3);
    table.final_demand << 5, 4, 2;
    table.value_added = Vector(3);
    table.value_added << 3, 4, 3;
    table.gross_output = Vector(3);
    table.gross_output << 7, 6, 5;
    return table;
}

}  // namespace gvcrank
