#pragma once

// Per-type F1 columns and the bottom "mean" row of the published comparison
// of four language models; rows in taxonomy order.

#include <array>
#include <string>

namespace published_f1 {

struct Column {
    std::string model;
    std::array<double, 17> f1;
    double mean;
};

inline const std::array<Column, 4>& columns() {
    static const std::array<Column, 4> cols = {{
        {"bert-base-cased",
         {0.483, 0.323, 0.327, 0.617, 0.000, 0.896, 0.535, 0.181, 0.883, 0.833, 0.566, 0.000, 0.683, 0.520, 0.222,
          0.718, 0.752},
         0.502},
        {"bert-base-german-cased",
         {0.836, 0.519, 0.634, 0.429, 0.774, 0.931, 0.648, 0.431, 0.877, 0.921, 0.765, 0.746, 0.712, 0.813, 0.633,
          0.822, 0.800},
         0.723},
        {"finbert",
         {0.734, 0.219, 0.647, 0.499, 0.596, 0.954, 0.547, 0.000, 0.868, 0.916, 0.531, 0.000, 0.628, 0.679, 0.556,
          0.782, 0.726},
         0.581},
        {"gbert-base",
         {0.898, 0.607, 0.561, 0.748, 0.770, 0.942, 0.769, 0.554, 0.927, 0.924, 0.775, 0.761, 0.665, 0.680, 0.438,
          0.846, 0.821},
         0.746},
    }};
    return cols;
}

}  // namespace published_f1
