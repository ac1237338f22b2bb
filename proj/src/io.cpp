// src/io.cpp

#include "nmrpath/io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace nmrpath {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double v, int decimals) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(decimals) << v;
    return os.str();
}

double parse_double(std::string_view s, const std::string& context) {
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    auto res = std::from_chars(first, s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::Parse, "not a number '" + std::string(s) + "' in " + context);
    return v;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

Json read_json(const std::filesystem::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

bool skip_line(const std::string& line) {
    const auto p = line.find_first_not_of(" \t\r");
    return p == std::string::npos || line[p] == '#';
}

}  // namespace

std::vector<Peak> parse_peaks(std::istream& in) {
    std::vector<Peak> peaks;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        const auto f = split_fields(line);
        const std::string ctx = "peak line " + std::to_string(lineno);
        if (f.size() < 4 || f.size() > 6) throw Error(ErrorCode::Parse, ctx + ": expected 4 to 6 fields");
        Peak p;
        p.peak_id = f[0];
        p.spectrum_id = f[1];
        p.h = parse_double(f[2], ctx);
        p.n = parse_double(f[3], ctx);
        if (f.size() >= 5 && f[4] != "-") p.c = parse_double(f[4], ctx);
        if (f.size() == 6) {
            const double ph = parse_double(f[5], ctx);
            if (ph != 1.0 && ph != -1.0 && ph != 0.0) throw Error(ErrorCode::Parse, ctx + ": phase must be +1, -1 or 0");
            p.phase = static_cast<int>(ph);
        }
        peaks.push_back(std::move(p));
    }
    return peaks;
}

std::vector<Peak> read_peaks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    return parse_peaks(in);
}

void write_peaks(std::ostream& out, const std::vector<Peak>& peaks) {
    out << "# peak_id\tspectrum_id\tH\tN\tC\tphase\n";
    for (const auto& p : peaks) {
        out << p.peak_id << '\t' << p.spectrum_id << '\t' << format_double(p.h) << '\t' << format_double(p.n) << '\t'
            << (p.c ? format_double(*p.c) : "-") << '\t' << (p.phase > 0 ? "+1" : p.phase < 0 ? "-1" : "0") << '\n';
    }
}

std::vector<SpinSystem> parse_spins(std::istream& in) {
    static constexpr AtomRole columns[] = {AtomRole::N,  AtomRole::HN,      AtomRole::CA,
                                           AtomRole::CB, AtomRole::CA_prev, AtomRole::CB_prev};
    std::vector<SpinSystem> spins;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        const auto f = split_fields(line);
        const std::string ctx = "spin line " + std::to_string(lineno);
        if (f.size() != 7) throw Error(ErrorCode::Parse, ctx + ": expected 7 fields");
        SpinSystem s;
        s.system_id = f[0];
        for (std::size_t c = 0; c < 6; ++c)
            if (f[c + 1] != "-") s.shifts[columns[c]] = parse_double(f[c + 1], ctx);
        spins.push_back(std::move(s));
    }
    return spins;
}

std::vector<SpinSystem> read_spins(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    return parse_spins(in);
}

void write_spins(std::ostream& out, const std::vector<SpinSystem>& spins) {
    static constexpr AtomRole columns[] = {AtomRole::N,  AtomRole::HN,      AtomRole::CA,
                                           AtomRole::CB, AtomRole::CA_prev, AtomRole::CB_prev};
    out << "# system_id\tN\tHN\tCA\tCB\tCA_prev\tCB_prev\n";
    for (const auto& s : spins) {
        out << s.system_id;
        for (AtomRole r : columns) {
            auto v = s.get(r);
            out << '\t' << (v ? format_double(*v) : "-");
        }
        out << '\n';
    }
}

ProteinSequence parse_sequence(const std::string& text) {
    std::string residues;
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line[0] == '>') continue;
        for (char c : line)
            if (!std::isspace(static_cast<unsigned char>(c))) residues.push_back(c);
    }
    return ProteinSequence(residues);
}

ProteinSequence read_sequence(const std::filesystem::path& path) { return parse_sequence(read_text(path)); }

std::string sequence_text(const ProteinSequence& seq) {
    std::string out;
    for (std::size_t i = 0; i < seq.size(); i += 60) out += seq.str().substr(i, 60) + "\n";
    return out;
}

Json to_json(const PriorTable& p) {
    Json res = Json::object();
    for (const auto& [residue, atoms] : p.residues()) {
        Json a = Json::object();
        for (const auto& [atom, entry] : atoms) {
            if (entry)
                a[std::string(to_string(atom))] = {{"mu", entry->mu}, {"sigma", entry->sigma}};
            else
                a[std::string(to_string(atom))] = "ABSENT";
        }
        res[std::string(1, residue)] = a;
    }
    Json noise = Json::object();
    for (const auto& [spec, dims] : p.noise())
        for (const auto& [dim, sigma] : dims) noise[spec][dim] = sigma;
    return {{"residues", res}, {"noise", noise}};
}

PriorTable priors_from_json(const Json& j) {
    PriorTable p;
    try {
        for (const auto& [code, atoms] : j.at("residues").items()) {
            if (code.size() != 1) throw Error(ErrorCode::Parse, "residue key '" + code + "' is not a one-letter code");
            for (const auto& [name, entry] : atoms.items()) {
                auto atom = parse_atom(name);
                if (!atom) throw Error(ErrorCode::Parse, "unknown atom '" + name + "' for residue " + code);
                if (entry.is_string()) {
                    if (entry.get<std::string>() != "ABSENT")
                        throw Error(ErrorCode::Parse, "unknown marker for " + code + "/" + name);
                    p.set_absent(code[0], *atom);
                } else {
                    p.set_prior(code[0], *atom, {entry.at("mu").get<double>(), entry.at("sigma").get<double>()});
                }
            }
        }
        if (j.contains("noise"))
            for (const auto& [spec, dims] : j.at("noise").items())
                for (const auto& [dim, sigma] : dims.items()) p.set_noise(spec, dim, sigma.get<double>());
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("prior table: ") + e.what());
    }
    return p;
}

Json to_json(const Tolerances& t) {
    return {{"delta1", t.delta1}, {"delta2", t.delta2},   {"delta3", t.delta3},
            {"delta", t.delta},   {"lambda", t.lambda}, {"round_eps", t.round_eps}};
}

Tolerances tolerances_from_json(const Json& j, Tolerances base) {
    try {
        for (const auto& [key, value] : j.items()) {
            const double v = value.get<double>();
            if (key == "delta1") base.delta1 = v;
            else if (key == "delta2") base.delta2 = v;
            else if (key == "delta3") base.delta3 = v;
            else if (key == "delta") base.delta = v;
            else if (key == "lambda") base.lambda = v;
            else if (key == "round_eps") base.round_eps = v;
            else throw Error(ErrorCode::Parse, "unknown tolerance key '" + key + "'");
        }
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("tolerances: ") + e.what());
    }
    base.validate();
    return base;
}

}  // namespace nmrpath
