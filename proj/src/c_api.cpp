//
// Copyright 2026 The Frontnet Toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "frontnet/frontnet.h"

#include "frontnet/augment.hpp"
#include "frontnet/cost_model.hpp"
#include "frontnet/engine.hpp"
#include "frontnet/error.hpp"
#include "frontnet/graph.hpp"
#include "frontnet/image.hpp"
#include "frontnet/plan_audit.hpp"
#include "frontnet/planner.hpp"
#include "frontnet/provenance.hpp"
#include "frontnet/qtns.hpp"
#include "frontnet/quantizer.hpp"
#include "frontnet/rng.hpp"
#include "frontnet/scenario.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <sstream>

struct fnt_graph
{
    frontnet::NetGraph g;
};
struct fnt_floatnet
{
    frontnet::FloatNet net;
};
struct fnt_qgraph
{
    frontnet::QuantizedGraph q;
};
struct fnt_plan
{
    frontnet::DeploymentPlan p;
};
struct fnt_image
{
    frontnet::GrayImage img;
};

namespace
{

using namespace frontnet;

thread_local std::string t_LastError;

fnt_status StatusOf(ErrorKind k)
{
    return static_cast<fnt_status>(static_cast<int>(k) + 1);
}

template <typename F>
fnt_status Guard(F&& f)
{
    try
    {
        t_LastError.clear();
        f();
        return FNT_OK;
    }
    catch (const Error& e)
    {
        t_LastError = e.what();
        return StatusOf(e.Kind());
    }
    catch (const nlohmann::json::exception& e)
    {
        t_LastError = std::string("malformed JSON: ") + e.what();
        return FNT_ERR_SCHEMA;
    }
    catch (const std::bad_alloc&)
    {
        t_LastError = "out of memory";
        return FNT_ERR_INTERNAL;
    }
    catch (const std::exception& e)
    {
        t_LastError = e.what();
        return FNT_ERR_INTERNAL;
    }
}

void Require(const void* p, const char* what)
{
    if (p == nullptr)
    {
        Fail(ErrorKind::InvalidArgument, std::string(what) + " must not be NULL");
    }
}

char* Dup(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr)
    {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

nlohmann::json ParseJson(const char* text, const char* what)
{
    try
    {
        return nlohmann::json::parse(text);
    }
    catch (const nlohmann::json::exception& e)
    {
        Fail(ErrorKind::Schema, std::string(what) + ": " + e.what());
    }
}

nlohmann::json ReadJsonFile(const std::string& path)
{
    return ParseJson(ReadTextFile(path).c_str(), path.c_str());
}

void WriteJsonFile(const std::string& path, nlohmann::json doc, const char* provenance)
{
    if (provenance != nullptr)
    {
        doc["provenance"] = ParseJson(provenance, "provenance");
    }
    WriteTextFile(path, doc.dump(1) + "\n");
}

MemoryHierarchy MemoryOrDefault(const char* memoryJson)
{
    return memoryJson ? MemoryFromJson(ParseJson(memoryJson, "memory hierarchy")) : MemoryHierarchy{};
}

CostParams ParamsOrDefault(const char* paramsJson)
{
    return paramsJson ? CostParamsFromJson(ParseJson(paramsJson, "cost parameters")) : CostParams{};
}

void FillPoint(const CostEstimate& e, fnt_operating_point* out)
{
    if (out == nullptr)
    {
        return;
    }
    out->f_fc_mhz    = e.op.fFc;
    out->f_cl_mhz    = e.op.fCl;
    out->vdd         = e.op.vdd;
    out->fps         = e.fps;
    out->mw_total    = e.mWTotal;
    out->mj_frame    = e.mJFrame;
    out->idle_layers = 0;
    for (const LayerCost& l : e.layers)
    {
        out->idle_layers += l.idleS > 0.0 ? 1 : 0;
    }
}

std::vector<double> AlphasOf(const QuantizedGraph& q)
{
    std::vector<double> a;
    for (const QLayer& l : q.layers)
    {
        a.push_back(l.alpha);
    }
    return a;
}

}    // namespace

extern "C" {

const char* fnt_version(void)
{
    return Version();
}

const char* fnt_last_error(void)
{
    return t_LastError.c_str();
}

void fnt_string_free(char* s)
{
    std::free(s);
}

fnt_status fnt_hash_file(const char* path, char** hex)
{
    return Guard([&] {
        Require(path, "path");
        Require(hex, "hex");
        *hex = Dup(HashFile(path));
    });
}

fnt_status fnt_graph_build(const char* variant, fnt_graph** out)
{
    return Guard([&] {
        Require(variant, "variant");
        Require(out, "out");
        *out = new fnt_graph{ BuildFrontnet(VariantFromString(variant)) };
    });
}

fnt_status fnt_graph_load(const char* path, fnt_graph** out)
{
    return Guard([&] {
        Require(path, "path");
        Require(out, "out");
        *out = new fnt_graph{ GraphFromJson(ReadJsonFile(path)) };
    });
}

fnt_status fnt_graph_save(const fnt_graph* g, const char* path, const char* provenance_json)
{
    return Guard([&] {
        Require(g, "graph");
        Require(path, "path");
        WriteJsonFile(path, GraphToJson(g->g), provenance_json);
    });
}

fnt_status fnt_graph_stats_get(const fnt_graph* g, fnt_graph_stats* out)
{
    return Guard([&] {
        Require(g, "graph");
        Require(out, "out");
        const GraphStats s = Analyze(g->g);
        out->macs          = s.macs;
        out->params        = s.params;
        out->memory_bytes  = s.memoryBytes;
        out->num_layers    = static_cast<int32_t>(g->g.layers.size());
    });
}

fnt_status fnt_graph_report(const fnt_graph* g, char** text)
{
    return Guard([&] {
        Require(g, "graph");
        Require(text, "text");
        *text = Dup(TableReport(g->g, Analyze(g->g)));
    });
}

const char* fnt_graph_variant(const fnt_graph* g)
{
    return g ? ToString(g->g.variant) : "";
}

void fnt_graph_free(fnt_graph* g)
{
    delete g;
}

fnt_status fnt_floatnet_random(const fnt_graph* g, uint64_t seed, fnt_floatnet** out)
{
    return Guard([&] {
        Require(g, "graph");
        Require(out, "out");
        *out = new fnt_floatnet{ RandomFloatNet(g->g, seed) };
    });
}

fnt_status fnt_floatnet_load(const fnt_graph* g, const char* dir, fnt_floatnet** out)
{
    return Guard([&] {
        Require(g, "graph");
        Require(dir, "dir");
        Require(out, "out");
        *out = new fnt_floatnet{ LoadFloatNet(g->g, dir) };
    });
}

fnt_status fnt_floatnet_save(const fnt_floatnet* net, const char* dir)
{
    return Guard([&] {
        Require(net, "net");
        Require(dir, "dir");
        SaveFloatNet(net->net, dir);
    });
}

void fnt_floatnet_free(fnt_floatnet* net)
{
    delete net;
}

fnt_status fnt_quantize(const fnt_floatnet* net, const char* calib_dir, int32_t random_count, uint64_t seed,
                        fnt_qgraph** out)
{
    return Guard([&] {
        Require(net, "net");
        Require(out, "out");
        const CalibrationSet calib = calib_dir ? LoadCalibration(net->net.graph, calib_dir)
                                               : RandomCalibration(net->net.graph, random_count, seed);
        *out = new fnt_qgraph{ Convert(net->net, Calibrate(net->net, calib)) };
    });
}

fnt_status fnt_qgraph_load(const char* path, fnt_qgraph** out)
{
    return Guard([&] {
        Require(path, "path");
        Require(out, "out");
        *out = new fnt_qgraph{ QGraphFromJson(ReadJsonFile(path)) };
    });
}

fnt_status fnt_qgraph_save(const fnt_qgraph* q, const char* path, const char* provenance_json)
{
    return Guard([&] {
        Require(q, "qgraph");
        Require(path, "path");
        WriteJsonFile(path, QGraphToJson(q->q), provenance_json);
    });
}

fnt_status fnt_qgraph_error_bound(const fnt_floatnet* net, const fnt_qgraph* q, double bound[4])
{
    return Guard([&] {
        Require(net, "net");
        Require(q, "qgraph");
        Require(bound, "bound");
        const auto b = QuantErrorBound(net->net, q->q);
        std::copy(b.begin(), b.end(), bound);
    });
}

fnt_status fnt_qgraph_graph(const fnt_qgraph* q, fnt_graph** out)
{
    return Guard([&] {
        Require(q, "qgraph");
        Require(out, "out");
        *out = new fnt_graph{ q->q.graph };
    });
}

void fnt_qgraph_free(fnt_qgraph* q)
{
    delete q;
}

fnt_status fnt_image_load(const char* path, fnt_image** out)
{
    return Guard([&] {
        Require(path, "path");
        Require(out, "out");
        *out = new fnt_image{ ReadPgm(path) };
    });
}

fnt_status fnt_image_size(const fnt_image* img, int32_t* width, int32_t* height)
{
    return Guard([&] {
        Require(img, "image");
        if (width)
        {
            *width = img->img.width;
        }
        if (height)
        {
            *height = img->img.height;
        }
    });
}

void fnt_image_free(fnt_image* img)
{
    delete img;
}

fnt_status fnt_infer(const fnt_qgraph* q, const fnt_image* frame, int32_t threads, double pose[4], int32_t raw[4])
{
    return Guard([&] {
        Require(q, "qgraph");
        Require(frame, "frame");
        Require(pose, "pose");
        const GrayImage in = PrepareInput(frame->img, q->q.graph);
        InferOptions opt;
        opt.threads             = threads;
        const InferenceResult r = InferInt(q->q, ImageToTensor(in), opt);
        pose[0]                 = r.pose.x;
        pose[1]                 = r.pose.y;
        pose[2]                 = r.pose.z;
        pose[3]                 = r.pose.theta;
        if (raw)
        {
            std::copy(r.raw.begin(), r.raw.end(), raw);
        }
    });
}

fnt_status fnt_infer_dump(const fnt_qgraph* q, const fnt_image* frame, const char* dir)
{
    return Guard([&] {
        Require(q, "qgraph");
        Require(frame, "frame");
        Require(dir, "dir");
        namespace fs = std::filesystem;
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
        {
            Fail(ErrorKind::NotFound, std::string("cannot create ") + dir + ": " + ec.message());
        }
        InferOptions opt;
        opt.keepActivations     = true;
        const InferenceResult r = InferInt(q->q, ImageToTensor(PrepareInput(frame->img, q->q.graph)), opt);
        for (std::size_t i = 0; i < r.activations.size(); ++i)
        {
            char prefix[8];
            std::snprintf(prefix, sizeof prefix, "%02zu_", i);
            WriteQtns((fs::path(dir) / (prefix + q->q.graph.layers[i].name + ".qtns")).string(), r.activations[i]);
        }
    });
}

fnt_status fnt_infer_float(const fnt_floatnet* net, const fnt_qgraph* q, const fnt_image* frame, double pose[4])
{
    return Guard([&] {
        Require(net, "net");
        Require(q, "qgraph");
        Require(frame, "frame");
        Require(pose, "pose");
        const GrayImage in            = PrepareInput(frame->img, net->net.graph);
        const std::vector<double> a   = AlphasOf(q->q);
        const std::array<double, 4> y = InferFloat(net->net, ImageToReal(in), &a);
        std::copy(y.begin(), y.end(), pose);
    });
}

fnt_status fnt_plan_create(const fnt_graph* g, const char* memory_json, const char* policy, int32_t fuse_pool,
                           fnt_plan** out)
{
    return Guard([&] {
        Require(g, "graph");
        Require(out, "out");
        PlanOptions opt;
        opt.policy   = policy ? WeightPolicyFromString(policy) : WeightPolicy::StreamedL3;
        opt.fusePool = fuse_pool != 0;
        *out         = new fnt_plan{ Plan(g->g, MemoryOrDefault(memory_json), opt) };
    });
}

fnt_status fnt_plan_load(const char* path, fnt_plan** out)
{
    return Guard([&] {
        Require(path, "path");
        Require(out, "out");
        *out = new fnt_plan{ PlanFromJson(ReadJsonFile(path)) };
    });
}

fnt_status fnt_plan_save(const fnt_plan* p, const char* path, const char* provenance_json)
{
    return Guard([&] {
        Require(p, "plan");
        Require(path, "path");
        WriteJsonFile(path, PlanToJson(p->p), provenance_json);
    });
}

fnt_status fnt_plan_audit(const fnt_plan* p, int32_t* ok, char** report)
{
    return Guard([&] {
        Require(p, "plan");
        Require(ok, "ok");
        const AuditReport a = AuditPlan(p->p);
        *ok                 = a.Ok() ? 1 : 0;
        if (report)
        {
            std::ostringstream os;
            os << "audit: " << a.tilesChecked << " tiles, " << a.nodesChecked << " nodes, "
               << a.violations.size() << " violations\n";
            for (const std::string& v : a.violations)
            {
                os << "  " << v << "\n";
            }
            *report = Dup(os.str());
        }
    });
}

fnt_status fnt_plan_memory_csv(const fnt_plan* p, char** csv)
{
    return Guard([&] {
        Require(p, "plan");
        Require(csv, "csv");
        *csv = Dup(MemoryReportCsv(p->p));
    });
}

fnt_status fnt_plan_report(const fnt_plan* p, char** text)
{
    return Guard([&] {
        Require(p, "plan");
        Require(text, "text");
        *text = Dup(MemoryReportText(p->p));
    });
}

void fnt_plan_free(fnt_plan* p)
{
    delete p;
}

fnt_status fnt_cost_params_default(char** json)
{
    return Guard([&] {
        Require(json, "json");
        *json = Dup(CostParamsToJson(CostParams{}).dump(1));
    });
}

fnt_status fnt_cost_calibrate(const char* memory_json, char** params_json, char** residuals_json)
{
    return Guard([&] {
        Require(params_json, "params_json");
        const auto targets          = AnchorTargets(MemoryOrDefault(memory_json));
        const CalibrationResult res = CalibrateParams(targets, CostParams{});
        *params_json                = Dup(CostParamsToJson(res.params).dump(1));
        if (residuals_json)
        {
            nlohmann::json r = nlohmann::json::array();
            for (std::size_t i = 0; i < targets.size(); ++i)
            {
                r.push_back({ { "target", targets[i].label },
                              { "fps_rel_error", res.residuals[2 * i] },
                              { "mw_rel_error", res.residuals[2 * i + 1] } });
            }
            *residuals_json = Dup(r.dump(1));
        }
    });
}

fnt_status fnt_estimate(const fnt_plan* p, const char* params_json, double f_fc_mhz, double f_cl_mhz,
                        fnt_operating_point* out, char** layers_csv)
{
    return Guard([&] {
        Require(p, "plan");
        Require(out, "out");
        const CostEstimate e = Estimate(p->p, MakeOperatingPoint(f_fc_mhz, f_cl_mhz), ParamsOrDefault(params_json));
        FillPoint(e, out);
        if (layers_csv)
        {
            std::ostringstream os;
            os << "layer,kind,compute_cycles,dma_cycles,idle_cycles,compute_us,stream_us,wall_us\n";
            char buf[256];
            for (const LayerCost& l : e.layers)
            {
                std::snprintf(buf, sizeof buf, "%s,%s,%.0f,%.0f,%.0f,%.3f,%.3f,%.3f\n", l.name.c_str(),
                              ToString(l.kind), l.computeCycles, l.dmaCycles, l.idleCycles, l.computeS * 1e6,
                              l.streamS * 1e6, l.wallS * 1e6);
                os << buf;
            }
            *layers_csv = Dup(os.str());
        }
    });
}

fnt_status fnt_sweep(const fnt_plan* p, const char* params_json, const char* csv_comment, char** csv,
                     fnt_operating_point* best_energy, fnt_operating_point* best_throughput)
{
    return Guard([&] {
        Require(p, "plan");
        const SweepResult s = Sweep(p->p, SweepGrid::Default(), ParamsOrDefault(params_json));
        if (csv)
        {
            *csv = Dup(SweepCsv(s, csv_comment ? csv_comment : ""));
        }
        FillPoint(s.rows[s.bestEnergy], best_energy);
        FillPoint(s.rows[s.bestThroughput], best_throughput);
    });
}

fnt_status fnt_sim_config_default(const char* net, uint64_t seed, char** config_json)
{
    return Guard([&] {
        Require(net, "net");
        Require(config_json, "config_json");
        *config_json = Dup(SimConfigToJson(DefaultSimConfig(net, seed)).dump(1));
    });
}

fnt_status fnt_simulate(const char* config_json, const char* csv_comment, char** metrics_csv, char** trajectory_csv)
{
    return Guard([&] {
        Require(config_json, "config_json");
        const SimResult r       = RunExperiment(SimConfigFromJson(ParseJson(config_json, "simulation config")));
        const std::string note  = csv_comment ? csv_comment : "";
        if (metrics_csv)
        {
            *metrics_csv = Dup(MetricsCsv({ r }, note));
        }
        if (trajectory_csv)
        {
            *trajectory_csv = Dup(TrajectoryCsv(r, note));
        }
    });
}

fnt_status fnt_augment_dataset(const char* labels_csv, const char* in_dir, const char* out_dir, int32_t copies,
                               uint64_t seed, const char* comment, int32_t* written)
{
    return Guard([&] {
        Require(labels_csv, "labels_csv");
        Require(in_dir, "in_dir");
        Require(out_dir, "out_dir");
        if (copies < 1)
        {
            Fail(ErrorKind::InvalidArgument, "copies must be at least 1");
        }
        namespace fs                   = std::filesystem;
        const std::vector<LabelRow> in = ReadLabelsCsv(labels_csv);
        std::error_code ec;
        fs::create_directories(out_dir, ec);
        if (ec)
        {
            Fail(ErrorKind::NotFound, std::string("cannot create ") + out_dir + ": " + ec.message());
        }
        const std::string note = comment ? comment : "";
        const AugmentConfig cfg;
        Rng rng(seed);
        std::vector<LabelRow> out;
        for (const LabelRow& row : in)
        {
            const LabeledImage src{ ReadPgm((fs::path(in_dir) / row.file).string()), row.label };
            const std::string stem = fs::path(row.file).stem().string();
            for (int k = 0; k < copies; ++k)
            {
                const AugmentedSample s = AugmentOne(src, cfg, rng);
                const std::string name  = stem + "_aug" + std::to_string(k) + ".pgm";
                WritePgm((fs::path(out_dir) / name).string(), s.sample.image, note);
                out.push_back({ name, s.sample.label });
            }
        }
        WriteLabelsCsv((fs::path(out_dir) / "labels.csv").string(), out, note);
        if (written)
        {
            *written = static_cast<int32_t>(out.size());
        }
    });
}

}    // extern "C"
