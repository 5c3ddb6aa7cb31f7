#include "reference_tables.hpp"

#include <array>

#include "metamat/error.hpp"

namespace metamat::cli {

namespace {

constexpr std::array<ReferenceRow, 16> kRows{{
    // ex1: n^2 = 5
    {1, 1.0, 5e-1, 1, 1.331e3, 3.722e-4, 5.445e-2, 9.747e-2},
    {1, 1.0, 5e-3, 5, 1.664e5, 3.198e-6, 1.098e-2, 4.219e-3},
    {1, 5.0, 5e-1, 1, 1.331e3, 3.200e-6, 2.196e-3, 8.448e-4},
    {1, 5.0, 5e-3, 3, 3.594e4, 1.225e-7, 7.320e-4, 9.701e-5},
    // ex2: Gaussian bump on 5
    {2, 1.0, 5e-1, 1, 1.331e3, 3.722e-4, 5.445e-2, 2.209e-1},
    {2, 1.0, 5e-3, 13, 2.924e6, 1.873e-7, 4.223e-3, 4.715e-3},
    {2, 5.0, 5e-1, 1, 1.331e3, 3.200e-6, 2.196e-3, 1.915e-3},
    {2, 5.0, 5e-3, 5, 1.664e5, 2.686e-8, 4.392e-4, 1.702e-4},
    // ex3: 1 + 0.5 sin(x1)
    {3, 1.0, 5e-1, 1, 1.331e3, 3.722e-4, 5.445e-2, 5.536e-4},
    {3, 1.0, 5e-4, 2, 1.065e4, 4.837e-5, 2.739e-2, 7.239e-5},
    {3, 5.0, 5e-1, 1, 1.331e3, 3.200e-6, 2.196e-3, 4.798e-6},
    {3, 5.0, 5e-5, 2, 1.065e4, 4.084e-7, 1.098e-3, 6.126e-7},
    // ex4: 1 + 0.5 sin(100 x1)
    {4, 1.0, 5e-1, 1, 1.331e3, 3.722e-4, 5.445e-2, 1.218e-2},
    {4, 1.0, 5e-4, 6, 2.875e5, 1.861e-6, 9.147e-3, 3.673e-4},
    {4, 5.0, 5e-1, 1, 1.331e3, 3.200e-6, 2.196e-3, 1.05e-4},
    {4, 5.0, 5e-5, 8, 6.815e5, 6.650e-9, 2.745e-4, 1.756e-6},
}};

}  // namespace

std::span<const ReferenceRow> reference_rows() { return kRows; }

std::string table_preset(int table) {
  if (table < 1 || table > 4) throw InvalidParameter("table id must be 1, 2, 3 or 4");
  return "ex" + std::to_string(table);
}

}  // namespace metamat::cli
