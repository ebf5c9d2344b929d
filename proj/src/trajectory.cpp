#include "nhsim/trajectory.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "nhsim/error.hpp"

namespace nhsim {

using dynamics::ModelKind;

namespace {

struct FieldName {
    Field field;
    const char* name;
};

constexpr std::array<FieldName, 13> kFieldNames{{
    {Field::ReA1, "re_a1"}, {Field::ImA1, "im_a1"}, {Field::AbsA1, "abs_a1"},
    {Field::ReA2, "re_a2"}, {Field::ImA2, "im_a2"}, {Field::AbsA2, "abs_a2"},
    {Field::ReB1, "re_b1"}, {Field::ImB1, "im_b1"}, {Field::ReB2, "re_b2"},
    {Field::ImB2, "im_b2"}, {Field::Q, "q"},        {Field::P, "p"},
    {Field::Norm, "norm"},
}};

// Offset of the real part of each mode in the flattened state, or -1.
int mode_offset(ModelKind k, Mode m) {
    switch (k) {
    case ModelKind::Exact:
        switch (m) {
        case Mode::A1: return 0;
        case Mode::B1: return 2;
        case Mode::A2: return 4;
        case Mode::B2: return 6;
        }
        break;
    case ModelKind::Effective:
        if (m == Mode::A1) return 0;
        if (m == Mode::A2) return 2;
        break;
    case ModelKind::Chaos:
        if (m == Mode::A1) return 2;
        if (m == Mode::A2) return 4;
        break;
    }
    return -1;
}

} // namespace

Field parse_field(const std::string& name) {
    for (const auto& f : kFieldNames) {
        if (name == f.name) return f.field;
    }
    throw InvalidParameter("unknown field '" + name + "'");
}

std::string field_name(Field f) {
    for (const auto& e : kFieldNames) {
        if (e.field == f) return e.name;
    }
    return "?";
}

Mode parse_mode(const std::string& name) {
    if (name == "a1") return Mode::A1;
    if (name == "a2") return Mode::A2;
    if (name == "b1") return Mode::B1;
    if (name == "b2") return Mode::B2;
    throw InvalidParameter("unknown mode '" + name + "' (expected a1, a2, b1 or b2)");
}

std::string mode_name(Mode m) {
    switch (m) {
    case Mode::A1: return "a1";
    case Mode::A2: return "a2";
    case Mode::B1: return "b1";
    case Mode::B2: return "b2";
    }
    return "?";
}

Trajectory::Trajectory(ModelKind model, std::vector<double> times, std::vector<double> data, Meta meta)
    : model_(model), times_(std::move(times)), data_(std::move(data)), meta_(std::move(meta)) {
    if (data_.size() != times_.size() * width()) {
        throw InvalidParameter("trajectory data size does not match model width");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw InvalidParameter("trajectory times must be strictly increasing");
        }
    }
}

std::span<const double> Trajectory::state(std::size_t i) const {
    return {data_.data() + i * width(), width()};
}

bool Trajectory::has(Mode m) const { return mode_offset(model_, m) >= 0; }

bool Trajectory::has(Field f) const {
    switch (f) {
    case Field::ReB1: case Field::ImB1: return has(Mode::B1);
    case Field::ReB2: case Field::ImB2: return has(Mode::B2);
    case Field::Q: case Field::P: return model_ == ModelKind::Chaos;
    default: return true;
    }
}

cplx Trajectory::amplitude(std::size_t i, Mode m) const {
    const int off = mode_offset(model_, m);
    if (off < 0) {
        throw InvalidParameter("mode " + mode_name(m) + " not present in " + dynamics::model_tag(model_) +
                               " trajectory");
    }
    const double* row = data_.data() + i * width();
    return {row[off], row[off + 1]};
}

double Trajectory::value(std::size_t i, Field f) const {
    switch (f) {
    case Field::ReA1: return amplitude(i, Mode::A1).real();
    case Field::ImA1: return amplitude(i, Mode::A1).imag();
    case Field::AbsA1: return std::abs(amplitude(i, Mode::A1));
    case Field::ReA2: return amplitude(i, Mode::A2).real();
    case Field::ImA2: return amplitude(i, Mode::A2).imag();
    case Field::AbsA2: return std::abs(amplitude(i, Mode::A2));
    case Field::ReB1: return amplitude(i, Mode::B1).real();
    case Field::ImB1: return amplitude(i, Mode::B1).imag();
    case Field::ReB2: return amplitude(i, Mode::B2).real();
    case Field::ImB2: return amplitude(i, Mode::B2).imag();
    case Field::Q:
    case Field::P:
        if (model_ != ModelKind::Chaos) {
            throw InvalidParameter("q/p only exist in chaos trajectories");
        }
        return data_[i * width() + (f == Field::Q ? 0 : 1)];
    case Field::Norm:
        return std::hypot(std::abs(amplitude(i, Mode::A1)), std::abs(amplitude(i, Mode::A2)));
    }
    return 0.0;
}

std::vector<cplx> Trajectory::amplitudes(Mode m) const {
    std::vector<cplx> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = amplitude(i, m);
    return out;
}

std::vector<double> Trajectory::series(Field f) const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < size(); ++i) out[i] = value(i, f);
    return out;
}

double Trajectory::uniform_step() const {
    if (size() < 2) {
        throw DiagnosticError("trajectory has fewer than 2 samples");
    }
    const double h = (times_.back() - times_.front()) / static_cast<double>(size() - 1);
    for (std::size_t i = 1; i < size(); ++i) {
        if (std::abs((times_[i] - times_[i - 1]) - h) > 1e-6 * h) {
            throw DiagnosticError("trajectory is not uniformly sampled");
        }
    }
    return h;
}

Trajectory integrate(const dynamics::ModelSpec& model, std::span<const double> initial, double t_end,
                     const ode::IntegratorConfig& cfg) {
    dynamics::validate(model);
    const ModelKind kind = dynamics::kind_of(model);
    if (initial.size() != dynamics::state_width(kind)) {
        throw InvalidParameter("initial state has " + std::to_string(initial.size()) + " components, " +
                               dynamics::model_tag(kind) + " model needs " +
                               std::to_string(dynamics::state_width(kind)));
    }
    if (!(t_end > 0.0)) {
        throw InvalidParameter("t_end must be > 0");
    }
    auto rhs = [&model](std::span<const double> x, std::span<double> dx) { dynamics::flat_rhs(model, x, dx); };
    std::vector<double> data;
    std::vector<double> x(initial.begin(), initial.end());
    std::vector<double> times = ode::integrate_sampled(rhs, std::move(x), 0.0, t_end, cfg, data);

    Trajectory::Meta meta{{"model", dynamics::model_tag(kind)}};
    for (const auto& [k, v] : dynamics::echo(model)) {
        meta.emplace_back("params." + k, format_number(v));
    }
    meta.emplace_back("integrator.method", ode::method_name(cfg.method));
    meta.emplace_back("integrator.rel_tol", format_number(cfg.rel_tol));
    meta.emplace_back("integrator.abs_tol", format_number(cfg.abs_tol));
    meta.emplace_back("integrator.max_step", format_number(cfg.max_step));
    meta.emplace_back("integrator.output_stride", format_number(cfg.output_stride));
    meta.emplace_back("t_end", format_number(t_end));
    return Trajectory(kind, std::move(times), std::move(data), std::move(meta));
}

// ---------------------------------------------------------------------------

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    (void)ec;
    return std::string(buf.data(), ptr);
}

std::vector<std::string> csv_columns(ModelKind model) {
    std::vector<std::string> cols{"t", "re_a1", "im_a1", "re_a2", "im_a2"};
    if (model == ModelKind::Exact) {
        cols.insert(cols.end(), {"re_b1", "im_b1", "re_b2", "im_b2"});
    } else if (model == ModelKind::Chaos) {
        cols.insert(cols.end(), {"q", "p"});
    }
    return cols;
}

void write_csv(std::ostream& os, const Trajectory& traj) {
    for (const auto& [k, v] : traj.meta()) {
        os << "# " << k << '=' << v << '\n';
    }
    const auto cols = csv_columns(traj.model());
    for (std::size_t c = 0; c < cols.size(); ++c) {
        os << (c ? "," : "") << cols[c];
    }
    os << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        os << format_number(traj.times()[i]);
        for (std::size_t c = 1; c < cols.size(); ++c) {
            os << ',' << format_number(traj.value(i, parse_field(cols[c])));
        }
        os << '\n';
    }
}

std::string to_csv(const Trajectory& traj) {
    std::ostringstream os;
    write_csv(os, traj);
    return os.str();
}

Trajectory read_csv(std::istream& is) {
    Trajectory::Meta meta;
    std::string line;
    std::vector<std::string> cols;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = line.substr(line.find_first_not_of("# "));
            const auto eq = body.find('=');
            if (eq != std::string::npos) {
                meta.emplace_back(body.substr(0, eq), body.substr(eq + 1));
            }
            continue;
        }
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
        break;
    }
    if (cols.empty()) {
        throw ConfigError("trajectory CSV has no header row");
    }

    ModelKind kind = ModelKind::Effective;
    if (cols.size() == 9) kind = ModelKind::Exact;
    else if (cols.size() == 7) kind = ModelKind::Chaos;
    else if (cols.size() != 5) throw ConfigError("unrecognised trajectory CSV header");
    if (cols != csv_columns(kind)) {
        throw ConfigError("unrecognised trajectory CSV header");
    }

    // Map CSV column index -> flattened state offset.
    std::vector<int> offset(cols.size(), -1);
    for (std::size_t c = 1; c < cols.size(); ++c) {
        const auto& name = cols[c];
        if (name == "q") { offset[c] = 0; continue; }
        if (name == "p") { offset[c] = 1; continue; }
        const Mode m = parse_mode(name.substr(3));
        offset[c] = mode_offset(kind, m) + (name.rfind("im_", 0) == 0 ? 1 : 0);
    }

    std::vector<double> times, data;
    const std::size_t width = dynamics::state_width(kind);
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row(width);
        std::stringstream ss(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(ss, cell, ',')) {
            double v = 0.0;
            try {
                v = std::stod(cell);
            } catch (const std::exception&) {
                throw ConfigError("line " + std::to_string(line_no) + ": bad number '" + cell + "'");
            }
            if (c == 0) times.push_back(v);
            else if (c < cols.size()) row[static_cast<std::size_t>(offset[c])] = v;
            ++c;
        }
        if (c != cols.size()) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols.size()) +
                              " columns");
        }
        data.insert(data.end(), row.begin(), row.end());
    }
    return Trajectory(kind, std::move(times), std::move(data), std::move(meta));
}

} // namespace nhsim
