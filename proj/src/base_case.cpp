#include "greencap/instance.hpp"

namespace greencap {

Instance base_case() {
    Instance b;
    b.name = "base-case";
    b.factories = {"F1", "F2", "F3"};
    b.capacities = {"I", "II", "III"};
    b.products = {"A", "B", "C"};
    b.periods = 4;
    b.tau = 0.10;
    b.lambda = 0.99;

    b.initial_lines.resize(3, 3);
    b.initial_lines << 3, 1, 2,
                       2, 0, 0,
                       0, 0, 2;
    b.initial_green = MatrixXi::Zero(3, 3);
    b.max_expand = MatrixXi::Ones(3, 3);
    b.max_terminate = MatrixXi::Ones(3, 3);

    b.expand_cost.resize(3, 3);
    b.terminate_cost.resize(3, 3);
    b.upgrade_cost.resize(3, 3);
    for (int i = 0; i < 3; ++i) {
        b.expand_cost.row(i) << 55.00, 14.00, 42.00;
        b.terminate_cost.row(i) << -8.00, 0.20, -5.40;
        b.upgrade_cost.row(i) << 5.50, 2.10, 8.00;
    }
    b.pv_capacity.resize(3);
    b.pv_capacity << 4000, 2500, 3000;
    b.renewable_cost.resize(3);
    b.renewable_cost << 14.00, 8.75, 10.50;

    b.throughput_old.resize(3);
    b.throughput_old << 449.97, 97.85, 262.08;
    b.throughput_green.resize(3);
    b.throughput_green << 440.30, 95.89, 256.05;

    // rows = capacity type, cols = product
    b.eligible.resize(3, 3);
    b.eligible << 1, 1, 1,
                  0, 0, 1,
                  1, 1, 1;
    b.util_old.resize(3, 3);
    b.util_old << 1.00, 1.00, 1.04,
                  0.00, 0.00, 1.00,
                  1.13, 1.00, 1.04;
    b.util_green.resize(3, 3);
    b.util_green << 1.01, 1.01, 1.04,
                    0.00, 0.00, 1.01,
                    1.13, 1.00, 1.04;
    b.energy.resize(3, 3);
    b.energy << 0.34, 0.37, 0.39,
                0.00, 0.00, 0.29,
                0.39, 0.37, 0.39;
    MatrixXd c_old(3, 3), c_green(3, 3);
    c_old << 1.86, 1.50, 1.33,
             0.00, 0.00, 1.50,
             2.47, 1.66, 1.93;
    c_green << 1.91, 1.53, 1.03,
               0.00, 0.00, 1.54,
               2.53, 1.69, 1.97;
    b.cost_old.assign(27, 0.0);
    b.cost_green.assign(27, 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) {
                b.cost_old[b.ijk(i, j, k)] = c_old(j, k);
                b.cost_green[b.ijk(i, j, k)] = c_green(j, k);
            }
    b.shortage_cost.resize(3);
    b.shortage_cost << 0.15, 0.18, 0.12;

    b.regions = {"R1", "R2", "R3"};
    b.nominal_demand.resize(9, 4);
    b.nominal_demand << 319.52, 538.68, 745.55, 546.87,
                        301.60, 508.46, 703.73, 516.20,
                        287.49, 484.68, 670.81, 492.05,
                        131.83, 222.25, 307.60, 225.63,
                        79.68, 134.34, 185.93, 136.38,
                        75.28, 126.91, 175.65, 128.84,
                        110.06, 185.56, 256.81, 188.38,
                        56.67, 95.55, 132.24, 97.00,
                        83.35, 140.52, 194.48, 142.66;
    return b;
}

}  // namespace greencap
