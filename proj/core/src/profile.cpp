#include "stripflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "stripflow/error.hpp"

namespace stripflow {

Profile Profile::constant(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw ParameterError("constant profile must be positive and finite");
    }
    Profile p;
    p.kind_ = Kind::Constant;
    p.coefficient_ = c;
    return p;
}

Profile Profile::power(double c, double exponent, double offset) {
    if (!(c > 0.0) || !std::isfinite(c) || !std::isfinite(exponent)) {
        throw ParameterError("power profile needs a positive coefficient");
    }
    if (exponent == 0.0) {
        return constant(c);
    }
    Profile p;
    p.kind_ = Kind::Power;
    p.coefficient_ = c;
    p.exponent_ = exponent;
    p.offset_ = offset;
    return p;
}

Profile Profile::tabulated(std::vector<double> s, std::vector<double> values) {
    if (s.size() < 2 || s.size() != values.size()) {
        throw ParameterError("tabulated profile needs at least two matching samples");
    }
    if (!std::is_sorted(s.begin(), s.end()) ||
        std::adjacent_find(s.begin(), s.end()) != s.end()) {
        throw ParameterError("tabulated profile abscissae must be strictly increasing");
    }
    Profile p;
    p.kind_ = Kind::TabulatedLogLinear;
    p.sample_s_ = std::move(s);
    p.sample_log_.reserve(values.size());
    for (double v : values) {
        if (!(v > 0.0)) {
            throw ParameterError("tabulated profile values must be positive");
        }
        p.sample_log_.push_back(std::log(v));
    }
    return p;
}

namespace {

// Index of the sample interval containing s, clamped to the table.
std::size_t segment(const std::vector<double>& xs, double s) {
    auto it = std::upper_bound(xs.begin(), xs.end(), s);
    std::size_t i = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
    return std::min(i, xs.size() - 2);
}

}  // namespace

double Profile::operator()(double s) const {
    switch (kind_) {
        case Kind::Constant:
            return coefficient_;
        case Kind::Power:
            return coefficient_ * std::pow(offset_ + s, exponent_);
        case Kind::TabulatedLogLinear: {
            std::size_t i = segment(sample_s_, s);
            double t = (s - sample_s_[i]) / (sample_s_[i + 1] - sample_s_[i]);
            return std::exp(sample_log_[i] + t * (sample_log_[i + 1] - sample_log_[i]));
        }
    }
    return 0.0;
}

double Profile::derivative(double s) const {
    switch (kind_) {
        case Kind::Constant:
            return 0.0;
        case Kind::Power:
            return coefficient_ * exponent_ * std::pow(offset_ + s, exponent_ - 1.0);
        case Kind::TabulatedLogLinear: {
            std::size_t i = segment(sample_s_, s);
            double slope = (sample_log_[i + 1] - sample_log_[i]) / (sample_s_[i + 1] - sample_s_[i]);
            return slope * (*this)(s);
        }
    }
    return 0.0;
}

double Profile::integral_of_power(double s0, double s1, double e) const {
    switch (kind_) {
        case Kind::Constant:
            return std::pow(coefficient_, e) * (s1 - s0);
        case Kind::Power: {
            double c = std::pow(coefficient_, e);
            double g = exponent_ * e + 1.0;
            double a = offset_ + s0;
            double b = offset_ + s1;
            if (std::abs(g) < 1e-14) {
                return c * std::log(b / a);
            }
            return c * (std::pow(b, g) - std::pow(a, g)) / g;
        }
        case Kind::TabulatedLogLinear: {
            // exp of a linear function integrates in closed form per segment.
            double total = 0.0;
            std::vector<double> cuts{s0};
            for (double x : sample_s_) {
                if (x > s0 && x < s1) cuts.push_back(x);
            }
            cuts.push_back(s1);
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                double a = cuts[k];
                double b = cuts[k + 1];
                double la = e * std::log((*this)(a));
                double lb = e * std::log((*this)(b));
                double h = b - a;
                if (std::abs(lb - la) < 1e-12) {
                    total += h * std::exp(0.5 * (la + lb));
                } else {
                    total += h * (std::exp(lb) - std::exp(la)) / (lb - la);
                }
            }
            return total;
        }
    }
    return 0.0;
}

Profile Profile::pow(double e) const {
    switch (kind_) {
        case Kind::Constant:
            return constant(std::pow(coefficient_, e));
        case Kind::Power:
            return power(std::pow(coefficient_, e), exponent_ * e, offset_);
        case Kind::TabulatedLogLinear: {
            Profile p = *this;
            for (double& l : p.sample_log_) l *= e;
            return p;
        }
    }
    return *this;
}

Profile Profile::scaled(double factor) const {
    if (!(factor > 0.0)) {
        throw ParameterError("profile scale factor must be positive");
    }
    Profile p = *this;
    if (kind_ == Kind::TabulatedLogLinear) {
        for (double& l : p.sample_log_) l += std::log(factor);
    } else {
        p.coefficient_ *= factor;
    }
    return p;
}

Profile Profile::operator*(const Profile& other) const {
    if (kind_ == Kind::Constant) return other.scaled(coefficient_);
    if (other.kind_ == Kind::Constant) return scaled(other.coefficient_);
    if (kind_ == Kind::Power && other.kind_ == Kind::Power && offset_ == other.offset_) {
        return power(coefficient_ * other.coefficient_, exponent_ + other.exponent_, offset_);
    }
    // Mixed kinds: tabulate on the union of the sample abscissae.
    std::set<double> xs;
    for (const Profile* p : {this, &other}) {
        for (double x : p->sample_s_) xs.insert(x);
    }
    if (xs.size() < 2) {
        throw ParameterError("cannot multiply power profiles with different global coordinates");
    }
    std::vector<double> s(xs.begin(), xs.end());
    std::vector<double> v;
    v.reserve(s.size());
    for (double x : s) v.push_back((*this)(x) * other(x));
    return tabulated(std::move(s), std::move(v));
}

void Profile::validate(double length) const {
    auto bad = [](double v) { return !(v > 0.0) || !std::isfinite(v); };
    if (kind_ == Kind::Power && !(offset_ > 0.0)) {
        throw ParameterError("power profile needs sigma = offset + s > 0 on the closed edge");
    }
    for (int i = 0; i <= 16; ++i) {
        double s = length * i / 16.0;
        if (bad((*this)(s))) {
            std::ostringstream os;
            os << "profile is not strictly positive at s=" << s;
            throw ParameterError(os.str());
        }
    }
}

EdgeCoefficients EdgeCoefficients::from_geometry(Profile phi, Profile psi, int n) {
    if (n != 0 && n != 1) {
        throw ParameterError("fiber dimension must be 0 or 1");
    }
    EdgeCoefficients c{phi, psi, psi * phi.pow(0.5 * (n - 1)), psi * phi.pow(0.5 * (n + 1)), n};
    return c;
}

}  // namespace stripflow
