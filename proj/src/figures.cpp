#include "bubble/figures.hpp"

#include <ostream>

#include "csv.hpp"

namespace bubble {

FigureSpec FigureSpec::published(int figure) {
    FigureSpec spec;
    switch (figure) {
    case 1: spec.params = MarketParams{0.8, 0.4, 0.2}; break;
    case 2: spec.params = MarketParams{0.2, 0.4, 0.8}; break;
    default: throw DomainError("figure must be 1 or 2");
    }
    return spec;
}

FigureData figure_data(const FigureSpec& spec) {
    spec.params.validate();
    if (spec.points < 2 || !(spec.s_min > 0.0) || !(spec.s_max > spec.s_min)) {
        throw DomainError("figure S-range needs 0 < s_min < s_max and at least two points");
    }
    if (!(spec.tau >= 0.0) || !(spec.strike > 0.0)) throw DomainError("figure needs tau >= 0 and strike > 0");
    FigureData out;
    const double h = (spec.s_max - spec.s_min) / static_cast<double>(spec.points - 1);
    for (std::size_t i = 0; i < spec.points; ++i) {
        const double S = i + 1 == spec.points ? spec.s_max : spec.s_min + static_cast<double>(i) * h;
        out.s.push_back(S);
        out.weak.push_back(
            price_call(RegimeTag::Weak, BubbleKind::Gaussian, S, 0.0, spec.tau, spec.params, spec.strike, spec.chart));
        out.strong.push_back(price_call(RegimeTag::Strong, BubbleKind::Gaussian, S, 0.0, spec.tau, spec.params,
                                        spec.strike, spec.chart));
    }
    return out;
}

void FigureData::write_csv(std::ostream& os) const {
    os << "S,V_weak,V_strong\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << csv::num(s[i]) << ',' << csv::num(weak[i]) << ',' << csv::num(strong[i]) << '\n';
    }
}

} // namespace bubble
