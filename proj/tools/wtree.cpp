#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "wtree/io.hpp"

using namespace wtree;
using io::Json;

namespace {

enum class LogLevel { Quiet, Info, Debug };

LogLevel log_level() {
    const char* env = std::getenv("W2_LOG");
    const std::string level = env ? env : "quiet";
    if (level == "debug") return LogLevel::Debug;
    if (level == "info") return LogLevel::Info;
    return LogLevel::Quiet;
}

void log(LogLevel level, const std::string& message) {
    if (level <= log_level() && level != LogLevel::Quiet) std::cerr << "[wtree] " << message << '\n';
}

struct Output {
    std::string path;

    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
        out << text;
    }
    void write(const Json& j) const { write(j.dump(2) + "\n"); }
};

MetricTree load_tree(const std::string& argument) {
    const MetricTree tree(io::parse_tree_spec(io::load_json(argument)));
    log(LogLevel::Info, "tree with " + std::to_string(tree.vertex_count()) + " vertices and " +
                            std::to_string(tree.edge_count()) + " edges");
    return tree;
}

// A point given as JSON or as a bare vertex id.
TreePoint load_point(const MetricTree& tree, const std::string& argument) {
    if (const auto v = tree.find_vertex(argument)) return TreePoint::at_vertex(*v);
    return io::parse_point(tree, io::load_json(argument));
}

// A ray plan given either explicitly or as {"base": point, "atoms": [cone atoms]}.
DynamicalPlan load_ray_plan(const MetricTree& tree, const std::string& argument) {
    const Json j = io::load_json(argument);
    if (j.is_object() && j.contains("base"))
        return ray_from_asymptotic_measure(tree, io::parse_point(tree, j.at("base")), io::parse_cone_measure(tree, j));
    return io::parse_dynamical_plan(tree, j);
}

std::vector<double> parse_grid(const std::string& spec) {
    if (spec == "default") return default_time_grid();
    std::vector<double> grid;
    std::stringstream in(spec);
    for (std::string item; std::getline(in, item, ',');) grid.push_back(io::parse_number(Json(item)));
    if (grid.empty()) throw Error(ErrorKind::ParseError, "empty time grid");
    return grid;
}

Json constructed_to_json(const MetricTree& tree, const ConstructedGeodesic& c) {
    Json pairs = Json::array();
    for (const auto& p : c.transport.plan)
        pairs.push_back({{"minus", tree.edge(p.minus.edge).id},
                         {"plus", tree.edge(p.plus.edge).id},
                         {"mass", io::format_number(p.mass)},
                         {"gromov_product", io::format_number(p.gromov)}});
    return {{"plan", io::dynamical_plan_to_json(tree, c.plan)},
            {"d0_transport", {{"value", io::format_number(c.transport.value)}, {"plan", pairs}}},
            {"realizability", io::format_number(c.realizability)},
            {"second_moment", io::format_number(c.second_moment)},
            {"flow_defects",
             {{"edge", io::format_number(c.flow_check.edge_defect)},
              {"vertex", io::format_number(c.flow_check.vertex_defect)},
              {"specific", io::format_number(c.flow_check.specific_defect)}}},
            {"ends_match", c.ends_match},
            {"antagonist_free", c.antagonist_free},
            {"unit_speed", c.unit_speed}};
}

const char* kSchemas = R"(JSON inputs (files or inline text; numbers may be JSON numbers or decimal strings, "inf" allowed):
  tree      {"vertices":["o","a"], "edges":[{"id":"e1","ends":["o","a"],"length":"1"},
             {"id":"r1","ends":["a"],"length":"inf"}], "basepoint":{"vertex":"o"}}
            an edge with one end is an infinite ray; basepoint defaults to the first vertex
  point     {"vertex":"o"} or {"edge":"e1","offset":"0.5"} (offset from the edge's first end)
  measure   {"atoms":[{"point":<point>,"mass":"0.5"}, ...]}, masses summing to 1
  plan      {"entries":[{"source":<point>,"target":<point>,"mass":"0.5"}, ...]}
  interval  {"kind":"segment","start":"0","finish":"1"} | {"kind":"ray"} | {"kind":"complete"}
  geodesic  {"from":<side>,"to":<side>,"interval":<interval>,"speed":"1","anchor":<point>,"anchor_time":"0"}
            side is a point or {"end":"r1"}; speed and anchor are optional for segments,
            rays (default speed 1, anchor at "from") and complete geodesics (anchor nearest the base point)
  dynamical {"interval":<interval>,"atoms":[{"geodesic":<geodesic>,"mass":"1"}, ...]}
  cone      {"atoms":[{"end":"r1","speed":"1","mass":"0.5"}, {"apex":true,"mass":"0.5"}]}
  boundary  {"atoms":[{"end":"r1","mass":"0.5"}, ...]}
  function  {"u":"2","v":"5"}  values at vertices
  radon     [{"vertex":"u","edges":["e1","e2"],"value":"3"}, ...]
Exit codes: 0 success, 1 domain error, 2 parse or usage error. W2_LOG=quiet|info|debug sets stderr verbosity.)";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exact quadratic optimal transport on metric trees"};
    app.footer(kSchemas);
    app.require_subcommand(1, 1);
    Output output;
    app.add_option("--out", output.path, "Write the result to this file instead of stdout");

    std::string tree_arg;
    std::function<void()> action;
    auto command = [&](const char* name, const char* help, bool needs_tree = true) {
        CLI::App* sub = app.add_subcommand(name, help);
        if (needs_tree) sub->add_option("--tree", tree_arg, "Tree JSON")->required();
        return sub;
    };

    // validate
    auto* validate_cmd = command("validate", "Check tree well-formedness and report leaves and valency-2 vertices");
    validate_cmd->callback([&] {
        action = [&] {
            const auto report = validate(io::parse_tree_spec(io::load_json(tree_arg)));
            output.write(io::validation_to_json(report));
            if (!report.valid) throw Error(ErrorKind::MalformedTree, "tree is invalid");
        };
    });

    // distance
    std::string p_arg, q_arg;
    auto* distance_cmd = command("distance", "Distance between two points");
    distance_cmd->add_option("--p", p_arg, "Point JSON or vertex id")->required();
    distance_cmd->add_option("--q", q_arg, "Point JSON or vertex id")->required();
    distance_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            const double d =
                tree.distance(load_point(tree, p_arg), load_point(tree, q_arg));
            output.write(Json{{"distance", io::format_number(d)}});
        };
    });

    // w2
    std::string mu_arg, nu_arg;
    auto* w2_cmd = command("w2", "Quadratic Wasserstein distance and an optimal plan");
    w2_cmd->add_option("--mu", mu_arg, "Measure JSON")->required();
    w2_cmd->add_option("--nu", nu_arg, "Measure JSON")->required();
    w2_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            const auto result = wasserstein2(tree, io::parse_measure(tree, io::load_json(mu_arg)),
                                             io::parse_measure(tree, io::load_json(nu_arg)));
            log(LogLevel::Debug, "duality gap " + io::format_number(result.duality_gap));
            output.write(Json{{"distance", io::format_number(result.distance)},
                              {"plan", io::plan_to_json(tree, result.plan)},
                              {"duality_gap", io::format_number(result.duality_gap)}});
        };
    });

    // interpolate
    double interp_time = -1.0;
    auto* interp_cmd = command("interpolate", "Displacement interpolation between two measures over [0,1]");
    interp_cmd->add_option("--mu", mu_arg, "Measure JSON")->required();
    interp_cmd->add_option("--nu", nu_arg, "Measure JSON")->required();
    interp_cmd->add_option("--t", interp_time, "Emit the time-t measure instead of the dynamical plan");
    interp_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            const auto plan = interpolate(tree, io::parse_measure(tree, io::load_json(mu_arg)),
                                          io::parse_measure(tree, io::load_json(nu_arg)));
            if (interp_cmd->count("--t")) {
                const auto at = pushforward_at(tree, plan, interp_time);
                output.write(io::measure_to_json(tree, at.atoms()));
            } else {
                output.write(io::dynamical_plan_to_json(tree, plan));
            }
        };
    });

    // certify-plan
    std::string plan_arg, dynamical_arg;
    std::size_t max_cycle = 0;
    auto* certify_cmd = command("certify-plan", "Cyclical monotonicity or dynamical optimality certificate");
    auto* plan_opt = certify_cmd->add_option("--plan", plan_arg, "Plan JSON");
    certify_cmd->add_option("--dynamical", dynamical_arg, "Dynamical plan JSON")->excludes(plan_opt);
    certify_cmd->add_option("--max-cycle", max_cycle, "Longest cycle checked (default: support size)");
    certify_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            if (!plan_arg.empty()) {
                const auto plan = io::parse_plan(tree, io::load_json(plan_arg));
                const auto cert = is_cyclically_monotone(
                    tree, plan, max_cycle ? std::optional<std::size_t>(max_cycle) : std::optional<std::size_t>(plan.entries.size()));
                output.write(io::certificate_to_json(cert));
                return;
            }
            if (dynamical_arg.empty()) throw Error(ErrorKind::ParseError, "certify-plan needs --plan or --dynamical");
            const auto plan = io::parse_dynamical_plan(tree, io::load_json(dynamical_arg));
            const auto cert = is_optimal_dynamical(tree, plan);
            Json antagonists = Json::array();
            for (const auto& a : cert.antagonists)
                antagonists.push_back({{"first", a.first}, {"second", a.second}, {"edge", tree.edge(a.edge).id}});
            Json times = Json::array();
            for (const auto& [s, t] : cert.checked_times) times.push_back({io::format_number(s), io::format_number(t)});
            Json j{{"optimal", cert.optimal},
                   {"antagonist_free", cert.antagonist_free},
                   {"antagonists", antagonists},
                   {"checked_times", times}};
            if (cert.failure) j["failure"] = io::certificate_to_json(*cert.failure);
            output.write(j);
        };
    });

    // asymptotic
    std::string sigma_arg, grid_arg = "default";
    bool full_report = false;
    auto* asym_cmd = command("asymptotic", "Table of W(mu_t, sigma_t)/t against W_inf of the asymptotic measures");
    asym_cmd->add_option("--mu", mu_arg, "Ray plan JSON, or {\"base\":<point>,\"atoms\":[cone atoms]}")->required();
    asym_cmd->add_option("--sigma", sigma_arg, "Ray plan JSON, same forms as --mu")->required();
    asym_cmd->add_option("--grid", grid_arg, "\"default\" or comma-separated times");
    asym_cmd->add_flag("--report", full_report, "Emit the full JSON report instead of CSV");
    asym_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            const auto grid = parse_grid(grid_arg);
            const auto report =
                asymptotic_formula_check(tree, load_ray_plan(tree, mu_arg), load_ray_plan(tree, sigma_arg), grid);
            if (full_report) output.write(io::asymptotic_to_json(report));
            else output.write(io::asymptotic_csv(report));
        };
    });

    // w-infinity
    std::string first_arg, second_arg;
    auto* winf_cmd = command("w-infinity", "Cone Wasserstein distance between two measures on the cone over the ends");
    winf_cmd->add_option("--first", first_arg, "Cone measure JSON")->required();
    winf_cmd->add_option("--second", second_arg, "Cone measure JSON")->required();
    winf_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            const auto a = io::parse_cone_measure(tree, io::load_json(first_arg));
            const auto b = io::parse_cone_measure(tree, io::load_json(second_arg));
            const auto result = w_infinity(a, b);
            Json plan = Json::array();
            for (const auto& c : result.plan)
                plan.push_back({{"first", c.first}, {"second", c.second}, {"mass", io::format_number(c.mass)}});
            output.write(Json{{"distance", io::format_number(result.distance)},
                              {"total_variation", io::format_number(total_variation(a, b))},
                              {"plan", plan}});
        };
    });

    // flows
    std::string minus_arg, plus_arg;
    auto* flows_cmd = command("flows", "Edge, vertex and specific flows of a pair of boundary measures");
    flows_cmd->add_option("--minus", minus_arg, "Boundary measure JSON at time -inf")->required();
    flows_cmd->add_option("--plus", plus_arg, "Boundary measure JSON at time +inf")->required();
    flows_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            const auto flows = flow_table(tree, io::parse_boundary_measure(tree, io::load_json(minus_arg)),
                                          io::parse_boundary_measure(tree, io::load_json(plus_arg)));
            Json j = io::flow_table_to_json(tree, flows);
            j["realizability"] = io::format_number(realizability_sum(tree, flows));
            output.write(j);
        };
    });

    // realizability
    std::size_t comb_depth = 0;
    double comb_exponent = 3.0;
    auto* real_cmd = app.add_subcommand("realizability", "Whether two boundary measures are joined by a W2 geodesic");
    auto* real_tree = real_cmd->add_option("--tree", tree_arg, "Tree JSON");
    real_cmd->add_option("--minus", minus_arg, "Boundary measure JSON")->needs(real_tree);
    real_cmd->add_option("--plus", plus_arg, "Boundary measure JSON")->needs(real_tree);
    real_cmd->add_option("--comb", comb_depth, "Use the comb of this depth instead of a tree")->excludes(real_tree);
    real_cmd->add_option("--exponent", comb_exponent, "Comb mass exponent");
    real_cmd->callback([&] {
        action = [&] {
            if (comb_depth) {
                output.write(io::realizability_to_json(comb_realizability(comb_generator(comb_depth, comb_exponent))));
                return;
            }
            if (tree_arg.empty()) throw Error(ErrorKind::ParseError, "realizability needs --tree or --comb");
            const auto tree = load_tree(tree_arg);
            const auto flows = flow_table(tree, io::parse_boundary_measure(tree, io::load_json(minus_arg)),
                                          io::parse_boundary_measure(tree, io::load_json(plus_arg)));
            RealizabilityReport report;
            report.value = realizability_sum(tree, flows);
            report.verdict = RealizabilityVerdict::Finite;
            report.depth = tree.vertex_count();
            output.write(io::realizability_to_json(report));
        };
    });

    // build-geodesic
    auto* build_cmd = app.add_subcommand("build-geodesic", "Complete W2 geodesic between two antipodal boundary measures");
    auto* build_tree = build_cmd->add_option("--tree", tree_arg, "Tree JSON");
    build_cmd->add_option("--minus", minus_arg, "Boundary measure JSON")->needs(build_tree);
    build_cmd->add_option("--plus", plus_arg, "Boundary measure JSON")->needs(build_tree);
    build_cmd->add_option("--comb", comb_depth, "Use the comb of this depth")->excludes(build_tree);
    build_cmd->add_option("--exponent", comb_exponent, "Comb mass exponent");
    build_cmd->callback([&] {
        action = [&] {
            if (comb_depth) {
                const auto comb = comb_generator(comb_depth, comb_exponent);
                output.write(constructed_to_json(comb.tree, construct_geodesic(comb)));
                return;
            }
            if (tree_arg.empty()) throw Error(ErrorKind::ParseError, "build-geodesic needs --tree or --comb");
            const auto tree = load_tree(tree_arg);
            const auto built = construct_geodesic(tree, io::parse_boundary_measure(tree, io::load_json(minus_arg)),
                                                  io::parse_boundary_measure(tree, io::load_json(plus_arg)));
            output.write(constructed_to_json(tree, built));
        };
    });

    // radon
    std::string h_arg, geodesic_arg;
    auto* radon_cmd = command("radon", "Combinatorial Radon transform of a vertex function, or projection of a measure");
    auto* h_opt = radon_cmd->add_option("--function", h_arg, "Vertex function JSON");
    auto* mu_opt = radon_cmd->add_option("--mu", mu_arg, "Measure JSON")->excludes(h_opt);
    radon_cmd->add_option("--geodesic", geodesic_arg, "Complete geodesic JSON")->needs(mu_opt);
    radon_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            if (!h_arg.empty()) {
                const auto h = io::parse_vertex_function(tree, io::load_json(h_arg));
                output.write(io::radon_data_to_json(tree, combinatorial_radon(tree, h)));
                return;
            }
            if (mu_arg.empty() || geodesic_arg.empty())
                throw Error(ErrorKind::ParseError, "radon needs --function, or --mu with --geodesic");
            const auto projected = radon_measure(tree, io::parse_measure(tree, io::load_json(mu_arg)),
                                                 io::parse_geodesic(tree, io::load_json(geodesic_arg)));
            output.write(io::measure_to_json(tree, projected.atoms()));
        };
    });

    // radon-invert
    std::string data_arg, total_arg;
    auto* invert_cmd = command("radon-invert", "Recover a vertex function from its Radon transform and total");
    invert_cmd->add_option("--data", data_arg, "Radon data JSON")->required();
    invert_cmd->add_option("--total", total_arg, "Sum of the function over all vertices")->required();
    invert_cmd->callback([&] {
        action = [&] {
            const auto tree = load_tree(tree_arg);
            const auto h = radon_invert(tree, io::parse_radon_data(tree, io::load_json(data_arg)),
                                        io::parse_number(Json(total_arg)));
            output.write(io::vertex_function_to_json(tree, h));
        };
    });

    // comb
    auto* comb_cmd = app.add_subcommand("comb", "Emit the comb tree and its two boundary measures");
    comb_cmd->add_option("--depth", comb_depth, "Number of teeth (at least 2)")->required();
    comb_cmd->add_option("--exponent", comb_exponent, "Mass exponent");
    comb_cmd->callback([&] {
        action = [&] {
            const auto comb = comb_generator(comb_depth, comb_exponent);
            output.write(Json{{"tree", io::tree_to_json(comb.tree)},
                              {"minus", io::boundary_measure_to_json(comb.tree, comb.minus)},
                              {"plus", io::boundary_measure_to_json(comb.tree, comb.plus)}});
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        action();
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return e.kind() == ErrorKind::ParseError ? 2 : 1;
    } catch (const Json::exception& e) {
        std::cerr << "ParseError: " << e.what() << '\n';
        return 2;
    }
}
