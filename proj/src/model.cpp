#include "qcw/model.hpp"

#include <cmath>

#include "qcw/errors.hpp"

namespace qcw {

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    while (!coeffs_.empty() && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
    return acc;
}

int Polynomial::degree() const { return static_cast<int>(coeffs_.size()) - 1; }

bool Polynomial::has_superlinear_growth() const {
    return degree() >= 2 && coeffs_.back() > 0.0;
}

void ModelParams::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw ParameterError("beta must be positive and finite");
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ParameterError("lambda must be nonnegative");
    if (!std::isfinite(h)) throw ParameterError("h must be finite");
    if (!p.has_superlinear_growth())
        throw ParameterError("P must have degree >= 2 and a positive leading coefficient");
}

}  // namespace qcw
