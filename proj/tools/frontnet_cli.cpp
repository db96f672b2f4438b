//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

// Command-line front end. Everything goes through the C interface of libfrontnet.

#include "frontnet/frontnet.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace
{

enum ExitCode
{
    kExitOk         = 0,
    kExitOther      = 1,
    kExitUsage      = 2,
    kExitNotFound   = 3,
    kExitSchema     = 4,
    kExitConstraint = 5,
};

const char* StatusName(fnt_status s)
{
    switch (s)
    {
        case FNT_OK:
            return "ok";
        case FNT_ERR_INVALID_ARGUMENT:
            return "invalid_argument";
        case FNT_ERR_DEGENERATE:
            return "degenerate";
        case FNT_ERR_OVERFLOW:
            return "overflow";
        case FNT_ERR_SHAPE_MISMATCH:
            return "shape_mismatch";
        case FNT_ERR_NOT_FOUND:
            return "not_found";
        case FNT_ERR_SCHEMA:
            return "schema";
        case FNT_ERR_CONSTRAINT:
            return "constraint";
        case FNT_ERR_NUMERIC:
            return "numeric";
        case FNT_ERR_INTERNAL:
            return "internal";
    }
    return "unknown";
}

int ExitFor(fnt_status s)
{
    switch (s)
    {
        case FNT_OK:
            return kExitOk;
        case FNT_ERR_INVALID_ARGUMENT:
            return kExitUsage;
        case FNT_ERR_NOT_FOUND:
            return kExitNotFound;
        case FNT_ERR_SCHEMA:
            return kExitSchema;
        case FNT_ERR_CONSTRAINT:
            return kExitConstraint;
        default:
            return kExitOther;
    }
}

struct CliFailure
{
    fnt_status status;
    std::string message;
};

void Check(fnt_status s)
{
    if (s != FNT_OK)
    {
        throw CliFailure{ s, fnt_last_error() };
    }
}

/// Owns a string returned by the library.
struct LibString
{
    char* p = nullptr;
    ~LibString()
    {
        fnt_string_free(p);
    }
    std::string Str() const
    {
        return p ? std::string(p) : std::string();
    }
};

template <typename T, void (*Free)(T*)>
struct Handle
{
    T* p = nullptr;
    ~Handle()
    {
        Free(p);
    }
};

using Graph    = Handle<fnt_graph, fnt_graph_free>;
using FloatNet = Handle<fnt_floatnet, fnt_floatnet_free>;
using QGraph   = Handle<fnt_qgraph, fnt_qgraph_free>;
using PlanH    = Handle<fnt_plan, fnt_plan_free>;
using Image    = Handle<fnt_image, fnt_image_free>;

/// Version, seed and input hashes carried by every artifact.
class Provenance
{
public:
    Provenance(std::string command, std::uint64_t seed)
        : m_Command(std::move(command))
        , m_Seed(seed)
    {}

    void AddFile(const std::string& label, const std::string& path)
    {
        LibString h;
        Check(fnt_hash_file(path.c_str(), &h.p));
        m_Inputs.emplace_back(label, h.Str());
    }
    void AddValue(const std::string& label, const std::string& value)
    {
        m_Inputs.emplace_back(label, value);
    }
    std::string Json() const
    {
        nlohmann::json j = { { "tool", "frontnet" },
                             { "version", fnt_version() },
                             { "command", m_Command },
                             { "seed", m_Seed } };
        nlohmann::json in = nlohmann::json::object();
        for (const auto& [k, v] : m_Inputs)
        {
            in[k] = v;
        }
        j["inputs"] = in;
        return j.dump();
    }
    std::string Line() const
    {
        std::string s = std::string("frontnet ") + fnt_version() + " " + m_Command + " seed=" + std::to_string(m_Seed);
        for (const auto& [k, v] : m_Inputs)
        {
            s += " " + k + "=" + v;
        }
        return s;
    }

private:
    std::string m_Command;
    std::uint64_t m_Seed;
    std::vector<std::pair<std::string, std::string>> m_Inputs;
};

void WriteText(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text))
    {
        throw CliFailure{ FNT_ERR_NOT_FOUND, "cannot write " + path };
    }
}

std::string ReadText(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw CliFailure{ FNT_ERR_NOT_FOUND, "cannot open " + path };
    }
    return std::string(std::istreambuf_iterator<char>(in), {});
}

/// Adds "# provenance" to a CSV body that has no comment of its own.
std::string WithComment(const std::string& line, const std::string& body)
{
    return "# " + line + "\n" + body;
}

void LoadGraph(const std::string& net, const std::string& graphPath, Provenance& prov, Graph& g)
{
    if (!graphPath.empty())
    {
        prov.AddFile("graph", graphPath);
        Check(fnt_graph_load(graphPath.c_str(), &g.p));
    }
    else
    {
        prov.AddValue("net", net);
        Check(fnt_graph_build(net.c_str(), &g.p));
    }
}

struct Options
{
    std::string net = "160x32";
    std::string graph;
    std::string out;
    std::string weights;
    std::string saveWeights;
    std::string calib;
    int calibCount = 16;
    std::uint64_t seed = 1;
    std::string qgraph;
    std::string image;
    int threads = 1;
    std::string policy = "streamed";
    std::string memory;
    bool fusePool = false;
    std::string csv;
    std::string plan;
    std::string params;
    bool calibrate = false;
    std::vector<double> at;
    std::string config;
    std::string trajectory;
    std::string dumpDir;
    std::string labels;
    std::string inDir;
    int copies = 1;
};

std::string OptionalFile(const std::string& path)
{
    return path.empty() ? std::string() : ReadText(path);
}

const char* OrNull(const std::string& s)
{
    return s.empty() ? nullptr : s.c_str();
}

int CmdAnalyze(const Options& o)
{
    Provenance prov("analyze", 0);
    Graph g;
    LoadGraph(o.net, o.graph, prov, g);
    LibString report;
    Check(fnt_graph_report(g.p, &report.p));
    std::cout << report.Str();
    if (!o.out.empty())
    {
        Check(fnt_graph_save(g.p, o.out.c_str(), prov.Json().c_str()));
    }
    return kExitOk;
}

void MakeFloatNet(const Options& o, const fnt_graph* g, Provenance& prov, FloatNet& net)
{
    if (!o.weights.empty())
    {
        prov.AddValue("weights", o.weights);
        Check(fnt_floatnet_load(g, o.weights.c_str(), &net.p));
    }
    else
    {
        Check(fnt_floatnet_random(g, o.seed, &net.p));
    }
}

int CmdQuantize(const Options& o)
{
    Provenance prov("quantize", o.seed);
    Graph g;
    LoadGraph(o.net, o.graph, prov, g);
    FloatNet net;
    MakeFloatNet(o, g.p, prov, net);
    if (!o.calib.empty())
    {
        prov.AddValue("calib", o.calib);
    }
    QGraph q;
    Check(fnt_quantize(net.p, OrNull(o.calib), o.calibCount, o.seed, &q.p));
    double bound[4];
    Check(fnt_qgraph_error_bound(net.p, q.p, bound));
    if (!o.saveWeights.empty())
    {
        Check(fnt_floatnet_save(net.p, o.saveWeights.c_str()));
    }
    Check(fnt_qgraph_save(q.p, o.out.c_str(), prov.Json().c_str()));
    std::printf("quantized %s -> %s\n", fnt_graph_variant(g.p), o.out.c_str());
    std::printf("output error bound x=%.6g y=%.6g z=%.6g theta=%.6g\n", bound[0], bound[1], bound[2], bound[3]);
    return kExitOk;
}

int CmdInfer(const Options& o)
{
    Provenance prov("infer", o.seed);
    prov.AddFile("qgraph", o.qgraph);
    prov.AddFile("image", o.image);
    QGraph q;
    Check(fnt_qgraph_load(o.qgraph.c_str(), &q.p));
    Image img;
    Check(fnt_image_load(o.image.c_str(), &img.p));
    double pose[4];
    int32_t raw[4];
    Check(fnt_infer(q.p, img.p, o.threads, pose, raw));
    nlohmann::json out = { { "pose", { { "x", pose[0] }, { "y", pose[1] }, { "z", pose[2] }, { "theta", pose[3] } } },
                           { "raw", { raw[0], raw[1], raw[2], raw[3] } } };
    if (!o.weights.empty() || o.calibrate)
    {
        // Float reference: the same weights the qgraph was built from.
        Graph g;
        Check(fnt_qgraph_graph(q.p, &g.p));
        FloatNet net;
        MakeFloatNet(o, g.p, prov, net);
        double fpose[4], bound[4];
        Check(fnt_infer_float(net.p, q.p, img.p, fpose));
        Check(fnt_qgraph_error_bound(net.p, q.p, bound));
        out["float_pose"] = { fpose[0], fpose[1], fpose[2], fpose[3] };
        out["bound"]      = { bound[0], bound[1], bound[2], bound[3] };
    }
    if (!o.dumpDir.empty())
    {
        Check(fnt_infer_dump(q.p, img.p, o.dumpDir.c_str()));
    }
    out["provenance"] = nlohmann::json::parse(prov.Json());
    const std::string text = out.dump(1) + "\n";
    if (o.out.size() > 4 && o.out.compare(o.out.size() - 4, 4, ".csv") == 0)
    {
        char row[256];
        std::snprintf(row, sizeof row, "%.9g,%.9g,%.9g,%.9g,%d,%d,%d,%d\n", pose[0], pose[1], pose[2], pose[3], raw[0],
                      raw[1], raw[2], raw[3]);
        WriteText(o.out, WithComment(prov.Line(), std::string("x,y,z,theta,raw_x,raw_y,raw_z,raw_theta\n") + row));
    }
    else if (!o.out.empty())
    {
        WriteText(o.out, text);
    }
    std::cout << text;
    return kExitOk;
}

int CmdPlan(const Options& o)
{
    Provenance prov("plan", 0);
    Graph g;
    LoadGraph(o.net, o.graph, prov, g);
    prov.AddValue("policy", o.policy);
    if (!o.memory.empty())
    {
        prov.AddFile("memory", o.memory);
    }
    const std::string mem = OptionalFile(o.memory);
    PlanH p;
    Check(fnt_plan_create(g.p, OrNull(mem), o.policy.c_str(), o.fusePool ? 1 : 0, &p.p));
    LibString report, audit, csv;
    Check(fnt_plan_report(p.p, &report.p));
    int32_t ok = 0;
    Check(fnt_plan_audit(p.p, &ok, &audit.p));
    std::cout << report.Str() << audit.Str();
    if (!o.out.empty())
    {
        Check(fnt_plan_save(p.p, o.out.c_str(), prov.Json().c_str()));
    }
    if (!o.csv.empty())
    {
        Check(fnt_plan_memory_csv(p.p, &csv.p));
        WriteText(o.csv, WithComment(prov.Line(), csv.Str()));
    }
    if (!ok)
    {
        throw CliFailure{ FNT_ERR_CONSTRAINT, "plan audit found violations" };
    }
    return kExitOk;
}

std::string ResolveParams(const Options& o, Provenance& prov)
{
    if (!o.params.empty())
    {
        prov.AddFile("params", o.params);
        return ReadText(o.params);
    }
    if (o.calibrate)
    {
        prov.AddValue("params", "calibrated");
        const std::string mem = OptionalFile(o.memory);
        LibString params;
        Check(fnt_cost_calibrate(OrNull(mem), &params.p, nullptr));
        return params.Str();
    }
    return std::string();
}

void PrintPoint(const char* label, const fnt_operating_point& p)
{
    std::printf("%s: FC %.0f MHz / CL %.0f MHz @ %.2f V  %.2f fps  %.2f mW  %.4f mJ/frame  idle layers %d\n", label,
                p.f_fc_mhz, p.f_cl_mhz, p.vdd, p.fps, p.mw_total, p.mj_frame, p.idle_layers);
}

int CmdSweep(const Options& o)
{
    Provenance prov("sweep", 0);
    PlanH p;
    if (!o.plan.empty())
    {
        prov.AddFile("plan", o.plan);
        Check(fnt_plan_load(o.plan.c_str(), &p.p));
    }
    else
    {
        Graph g;
        LoadGraph(o.net, o.graph, prov, g);
        prov.AddValue("policy", o.policy);
        const std::string mem = OptionalFile(o.memory);
        Check(fnt_plan_create(g.p, OrNull(mem), o.policy.c_str(), o.fusePool ? 1 : 0, &p.p));
    }
    const std::string params = ResolveParams(o, prov);
    if (o.at.size() == 2)
    {
        fnt_operating_point pt{};
        LibString layers;
        Check(fnt_estimate(p.p, OrNull(params), o.at[0], o.at[1], &pt, &layers.p));
        PrintPoint("estimate", pt);
        std::cout << layers.Str();
        if (!o.out.empty())
        {
            WriteText(o.out, WithComment(prov.Line(), layers.Str()));
        }
        return kExitOk;
    }
    fnt_operating_point be{}, bt{};
    LibString csv;
    Check(fnt_sweep(p.p, OrNull(params), prov.Line().c_str(), &csv.p, &be, &bt));
    if (!o.out.empty())
    {
        WriteText(o.out, csv.Str());
    }
    else
    {
        std::cout << csv.Str();
    }
    PrintPoint("best energy", be);
    PrintPoint("best throughput", bt);
    return kExitOk;
}

int CmdCalibrate(const Options& o)
{
    Provenance prov("calibrate", 0);
    if (!o.memory.empty())
    {
        prov.AddFile("memory", o.memory);
    }
    const std::string mem = OptionalFile(o.memory);
    LibString params, residuals;
    Check(fnt_cost_calibrate(OrNull(mem), &params.p, &residuals.p));
    nlohmann::json doc  = nlohmann::json::parse(params.Str());
    doc["residuals"]    = nlohmann::json::parse(residuals.Str());
    doc["provenance"]   = nlohmann::json::parse(prov.Json());
    const std::string t = doc.dump(1) + "\n";
    if (!o.out.empty())
    {
        WriteText(o.out, t);
    }
    std::cout << t;
    return kExitOk;
}

int CmdSimulate(const Options& o)
{
    Provenance prov("simulate", o.seed);
    std::string config;
    if (!o.config.empty())
    {
        prov.AddFile("config", o.config);
        nlohmann::json j;
        try
        {
            j = nlohmann::json::parse(ReadText(o.config));
        }
        catch (const nlohmann::json::exception& e)
        {
            throw CliFailure{ FNT_ERR_SCHEMA, std::string("simulation config: ") + e.what() };
        }
        if (!j.contains("net"))
        {
            j["net"] = o.net;
        }
        j["seed"] = o.seed;
        config    = j.dump();
    }
    else
    {
        prov.AddValue("net", o.net);
        LibString c;
        Check(fnt_sim_config_default(o.net.c_str(), o.seed, &c.p));
        config = c.Str();
    }
    LibString metrics, traj;
    Check(fnt_simulate(config.c_str(), prov.Line().c_str(), &metrics.p, o.trajectory.empty() ? nullptr : &traj.p));
    if (!o.out.empty())
    {
        WriteText(o.out, metrics.Str());
    }
    if (!o.trajectory.empty())
    {
        WriteText(o.trajectory, traj.Str());
    }
    std::cout << metrics.Str();
    return kExitOk;
}

int CmdAugment(const Options& o)
{
    Provenance prov("augment", o.seed);
    prov.AddFile("labels", o.labels);
    int32_t written = 0;
    Check(fnt_augment_dataset(o.labels.c_str(), o.inDir.c_str(), o.out.c_str(), o.copies, o.seed,
                              prov.Line().c_str(), &written));
    std::printf("wrote %d augmented images to %s\n", written, o.out.c_str());
    return kExitOk;
}

}    // namespace

int main(int argc, char** argv)
{
    CLI::App app{ "frontnet: analysis, quantization, deployment planning and control simulation for the "
                  "Frontnet pose networks" };
    app.set_version_flag("--version", std::string(fnt_version()));
    app.require_subcommand(1);

    Options o;
    const std::vector<std::string> nets{ "160x32", "160x16", "80x32" };
    auto addNet = [&](CLI::App* c) {
        c->add_option("--net", o.net, "network variant")->check(CLI::IsMember(nets));
        c->add_option("--graph", o.graph, "graph JSON instead of a built-in variant");
    };

    auto* analyze = app.add_subcommand("analyze", "per-layer MACs, parameters and memory");
    addNet(analyze);
    analyze->add_option("--out", o.out, "write the graph JSON here");

    auto* quantize = app.add_subcommand("quantize", "post-training 8-bit quantization");
    addNet(quantize);
    quantize->add_option("--weights", o.weights, "directory of float QTNS tensors (random weights otherwise)");
    quantize->add_option("--save-weights", o.saveWeights, "write the float weights used");
    quantize->add_option("--calib", o.calib, "directory of PGM calibration frames");
    quantize->add_option("--calib-count", o.calibCount, "synthetic calibration frames when --calib is absent");
    quantize->add_option("--seed", o.seed, "seed for random weights and calibration");
    quantize->add_option("--out", o.out, "quantized graph JSON")->required();

    auto* infer = app.add_subcommand("infer", "integer inference on one PGM frame");
    infer->add_option("--qgraph", o.qgraph, "quantized graph JSON")->required();
    infer->add_option("--image", o.image, "PGM frame")->required();
    infer->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 64));
    infer->add_option("--weights", o.weights, "float weights for a reference comparison");
    infer->add_flag("--compare-random", o.calibrate, "compare against the random float net of --seed");
    infer->add_option("--seed", o.seed, "seed of the random float net");
    infer->add_option("--out", o.out, "result file: CSV when the name ends in .csv, JSON otherwise");
    infer->add_option("--dump-activations", o.dumpDir, "write every layer output as QTNS into this directory");

    auto* plan = app.add_subcommand("plan", "tiling and L2/L3 deployment plan");
    addNet(plan);
    plan->add_option("--policy", o.policy, "weight policy")->check(CLI::IsMember({ "streamed", "resident" }));
    plan->add_option("--memory", o.memory, "memory hierarchy JSON");
    plan->add_flag("--fuse-pool", o.fusePool, "schedule the pool with the first convolution");
    plan->add_option("--out", o.out, "plan JSON");
    plan->add_option("--csv", o.csv, "per-layer L2 occupancy CSV");

    auto* sweep = app.add_subcommand("sweep", "latency and energy over the operating-point grid");
    addNet(sweep);
    sweep->add_option("--plan", o.plan, "plan JSON (built from --net otherwise)");
    sweep->add_option("--policy", o.policy, "weight policy")->check(CLI::IsMember({ "streamed", "resident" }));
    sweep->add_option("--memory", o.memory, "memory hierarchy JSON");
    sweep->add_option("--params", o.params, "cost parameter JSON");
    sweep->add_flag("--calibrate", o.calibrate, "fit the cost parameters to the anchor measurements first");
    sweep->add_option("--at", o.at, "single point FC_MHZ CL_MHZ with per-layer detail")->expected(2);
    sweep->add_option("--out", o.out, "CSV output");

    auto* calibrate = app.add_subcommand("calibrate", "fit cost-model coefficients to the anchor measurements");
    calibrate->add_option("--memory", o.memory, "memory hierarchy JSON");
    calibrate->add_option("--out", o.out, "cost parameter JSON");

    auto* simulate = app.add_subcommand("simulate", "closed-loop tracking experiment");
    simulate->add_option("--net", o.net, "observation source")
        ->check(CLI::IsMember({ "160x32", "160x16", "80x32", "mocap" }));
    simulate->add_option("--seed", o.seed, "noise seed");
    simulate->add_option("--config", o.config, "simulation config JSON");
    simulate->add_option("--out", o.out, "metrics CSV");
    simulate->add_option("--trajectory", o.trajectory, "100 Hz trajectory CSV");

    auto* augment = app.add_subcommand("augment", "augment a labelled PGM dataset");
    augment->add_option("--labels", o.labels, "labels CSV (file,x,y,z,theta)")->required();
    augment->add_option("--in", o.inDir, "image directory")->required();
    augment->add_option("--out", o.out, "output directory")->required();
    augment->add_option("--copies", o.copies, "variants per image")->check(CLI::Range(1, 1000));
    augment->add_option("--seed", o.seed, "augmentation seed");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        std::cerr << app.help();
        return kExitUsage;
    }

    try
    {
        if (*analyze)
            return CmdAnalyze(o);
        if (*quantize)
            return CmdQuantize(o);
        if (*infer)
            return CmdInfer(o);
        if (*plan)
            return CmdPlan(o);
        if (*sweep)
            return CmdSweep(o);
        if (*calibrate)
            return CmdCalibrate(o);
        if (*simulate)
            return CmdSimulate(o);
        if (*augment)
            return CmdAugment(o);
    }
    catch (const CliFailure& f)
    {
        const nlohmann::json err = { { "error", StatusName(f.status) }, { "message", f.message } };
        std::cerr << err.dump() << "\n";
        return ExitFor(f.status);
    }
    catch (const std::exception& e)
    {
        const nlohmann::json err = { { "error", "internal" }, { "message", e.what() } };
        std::cerr << err.dump() << "\n";
        return kExitOther;
    }
    return kExitUsage;
}
