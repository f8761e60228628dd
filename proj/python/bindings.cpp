#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "hcv/config.hpp"
#include "hcv/errors.hpp"
#include "hcv/eval.hpp"
#include "hcv/features.hpp"
#include "hcv/flowio.hpp"
#include "hcv/global_cost.hpp"
#include "hcv/local_cost.hpp"
#include "hcv/memory.hpp"
#include "hcv/numerics.hpp"
#include "hcv/parallel.hpp"
#include "hcv/pipeline.hpp"
#include "hcv/refine.hpp"
#include "hcv/selfcheck.hpp"
#include "hcv/synthetic.hpp"

namespace py = pybind11;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;
using ByteArray = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

py::array_t<float> to_numpy(const hcv::Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape().begin(), t.shape().end());
    py::array_t<float> out(shape);
    std::copy(t.data().begin(), t.data().end(), out.mutable_data());
    return out;
}

hcv::Tensor to_tensor(const FloatArray& a) {
    std::vector<std::int64_t> shape(a.shape(), a.shape() + a.ndim());
    return hcv::Tensor(shape, std::vector<float>(a.data(), a.data() + a.size()));
}

hcv::Image to_image(const ByteArray& a) {
    if (a.ndim() != 2 && !(a.ndim() == 3 && a.shape(2) == 3)) {
        throw hcv::InvalidArgument("images are HxW (gray) or HxWx3 (RGB) uint8 arrays");
    }
    hcv::Image img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), a.ndim() == 2 ? 1 : 3);
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

py::array_t<std::uint8_t> from_image(const hcv::Image& img) {
    std::vector<py::ssize_t> shape{img.height, img.width};
    if (img.channels == 3) shape.push_back(3);
    py::array_t<std::uint8_t> out(shape);
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

template <typename Volume>
py::array_t<bool> mask_array(const Volume& vol) {
    py::array_t<bool> out({vol.height(), vol.width(), vol.disp_count()});
    bool* p = out.mutable_data();
    for (int y = 0; y < vol.height(); ++y)
        for (int x = 0; x < vol.width(); ++x)
            for (int j = 0; j < vol.disp_count(); ++j) *p++ = vol.valid(y, x, j);
    return out;
}

hcv::Axis parse_axis(const std::string& s) {
    if (s == "horizontal") return hcv::Axis::horizontal;
    if (s == "vertical") return hcv::Axis::vertical;
    throw hcv::InvalidArgument("axis must be 'horizontal' or 'vertical'");
}

py::dict report_dict(const hcv::MetricReport& r) {
    py::dict d;
    d["epe"] = r.epe_mean;
    d["epe_median"] = r.epe_median;
    d["f1_all"] = r.f1_all;
    d["pixel_count"] = r.pixel_count;
    d["epe_s0_40"] = r.epe_s0_40;
    d["epe_s40_plus"] = r.epe_s40_plus;
    return d;
}

py::dict plan_dict(const hcv::MemoryPlan& p) {
    py::dict buffers;
    for (const auto& b : p.buffers) buffers[py::str(b.name)] = py::make_tuple(b.elements, b.bytes);
    py::dict d;
    d["method"] = p.method;
    d["buffers"] = buffers;
    d["total_elements"] = p.total_elements;
    d["total_bytes"] = p.total_bytes;
    return d;
}

std::vector<std::uint8_t> mask_vector(const std::optional<ByteArray>& m) {
    if (!m) return {};
    return {m->data(), m->data() + m->size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Hybrid cost volume optical flow: Top-K global volumes, local volume, refinement";

    py::register_exception<hcv::InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
    py::register_exception<hcv::EmptySupport>(m, "EmptySupport", PyExc_ValueError);
    py::register_exception<hcv::FormatError>(m, "FormatError", PyExc_IOError);
    py::register_exception<hcv::BudgetExceeded>(m, "BudgetExceeded", PyExc_MemoryError);

    m.def("set_num_threads", &hcv::set_num_threads);
    m.def("num_threads", &hcv::num_threads);

    // numerics
    m.def("topk", [](const FloatArray& values, int k) {
        const auto r = hcv::topk({values.data(), static_cast<std::size_t>(values.size())}, k);
        return py::make_tuple(r.scores, r.indices);
    }, py::arg("values"), py::arg("k"));
    m.def("masked_softmax", [](const FloatArray& values, const std::vector<bool>& mask, float t) {
        std::vector<std::uint8_t> mk(mask.begin(), mask.end());
        if (mk.size() != static_cast<std::size_t>(values.size())) throw hcv::InvalidArgument("mask length mismatch");
        std::vector<float> out(mk.size());
        hcv::masked_softmax_into({values.data(), mk.size()}, mk, t, out);
        return out;
    }, py::arg("values"), py::arg("mask"), py::arg("temperature") = 1.0f);
    m.def("bilinear_sample", [](const FloatArray& map, float x, float y) {
        return hcv::bilinear_sample(to_tensor(map), x, y);
    });

    // features
    py::class_<hcv::FeatureMap>(m, "FeatureMap")
        .def(py::init([](const FloatArray& data, int level) {
            hcv::FeatureMap f;
            f.level = level;
            f.data = to_tensor(data);
            return f;
        }), py::arg("data"), py::arg("level"))
        .def_readonly("level", &hcv::FeatureMap::level)
        .def_property_readonly("data", [](const hcv::FeatureMap& f) { return to_numpy(f.data); })
        .def_property_readonly("shape", [](const hcv::FeatureMap& f) {
            return py::make_tuple(f.channels(), f.height(), f.width());
        });
    m.def("extract_features", [](const ByteArray& img, int level) {
        return hcv::extract_features(to_image(img), level);
    }, py::arg("image"), py::arg("level"));
    m.def("build_pyramid", [](const ByteArray& img) { return hcv::build_pyramid(to_image(img)); });

    // flow fields
    py::class_<hcv::FlowField>(m, "FlowField")
        .def(py::init([](const FloatArray& u, const FloatArray& v, int level) {
            hcv::FlowField f;
            f.level = level;
            f.u = to_tensor(u);
            f.v = to_tensor(v);
            if (f.u.rank() != 2 || f.u.shape() != f.v.shape()) throw hcv::InvalidArgument("u and v must be equal HxW arrays");
            return f;
        }), py::arg("u"), py::arg("v"), py::arg("level") = 1)
        .def_readonly("level", &hcv::FlowField::level)
        .def_property_readonly("u", [](const hcv::FlowField& f) { return to_numpy(f.u); })
        .def_property_readonly("v", [](const hcv::FlowField& f) { return to_numpy(f.v); })
        .def_property_readonly("valid", [](const hcv::FlowField& f) -> py::object {
            if (f.valid.empty()) return py::none();
            py::array_t<bool> out({f.height(), f.width()});
            std::copy(f.valid.begin(), f.valid.end(), out.mutable_data());
            return out;
        });

    // global volumes
    py::class_<hcv::TopkCostVolume>(m, "TopkCostVolume")
        .def_property_readonly("axis", [](const hcv::TopkCostVolume& v) { return std::string(hcv::to_string(v.axis())); })
        .def_property_readonly("max_disp", &hcv::TopkCostVolume::max_disp)
        .def_property_readonly("k", &hcv::TopkCostVolume::k)
        .def("scores", [](const hcv::TopkCostVolume& v) {
            py::array_t<float> out({v.height(), v.width(), v.disp_count(), v.k()});
            float* p = out.mutable_data();
            for (int y = 0; y < v.height(); ++y)
                for (int x = 0; x < v.width(); ++x)
                    for (int j = 0; j < v.disp_count(); ++j)
                        for (float s : v.scores_at(y, x, j)) *p++ = s;
            return out;
        })
        .def("indices", [](const hcv::TopkCostVolume& v) {
            py::array_t<std::int32_t> out({v.height(), v.width(), v.disp_count(), v.k()});
            std::int32_t* p = out.mutable_data();
            for (int y = 0; y < v.height(); ++y)
                for (int x = 0; x < v.width(); ++x)
                    for (int j = 0; j < v.disp_count(); ++j)
                        for (auto i : v.indices_at(y, x, j)) *p++ = i;
            return out;
        })
        .def("valid", &mask_array<hcv::TopkCostVolume>);
    py::class_<hcv::AggregatedCostVolume>(m, "AggregatedCostVolume")
        .def_property_readonly("max_disp", &hcv::AggregatedCostVolume::max_disp)
        .def("scores", [](const hcv::AggregatedCostVolume& v) {
            py::array_t<float> out({v.height(), v.width(), v.disp_count()});
            float* p = out.mutable_data();
            for (int y = 0; y < v.height(); ++y)
                for (int x = 0; x < v.width(); ++x)
                    for (float s : v.scores_at(y, x)) *p++ = s;
            return out;
        })
        .def("valid", &mask_array<hcv::AggregatedCostVolume>);
    py::class_<hcv::AggWeights>(m, "AggWeights")
        .def_static("averaging", &hcv::AggWeights::averaging)
        .def_static("smoothing", &hcv::AggWeights::smoothing)
        .def_static("read", [](const std::filesystem::path& p) { return hcv::read_hcvw(p); })
        .def("write", [](const hcv::AggWeights& w, const std::filesystem::path& p) { hcv::write_hcvw(p, w); })
        .def_property_readonly("layer_count", [](const hcv::AggWeights& w) { return w.layers.size(); });

    m.def("correlation", &hcv::correlation);
    m.def("build_topk_volume", [](const hcv::FeatureMap& f1, const hcv::FeatureMap& f2, const std::string& axis,
                                  int d, int k) { return hcv::build_topk_volume(f1, f2, parse_axis(axis), d, k); },
          py::arg("f1"), py::arg("f2"), py::arg("axis"), py::arg("max_disp"), py::arg("k"));
    m.def("aggregate", &hcv::aggregate);
    m.def("initial_flow", &hcv::initial_flow, py::arg("horizontal"), py::arg("vertical"),
          py::arg("temperature") = 1.0f);

    // local volume and refinement
    m.def("build_local_volume", [](const hcv::FeatureMap& f1, const hcv::FeatureMap& f2, int r) {
        const hcv::LocalCostVolume v = hcv::build_local_volume(f1, f2, r);
        py::array_t<float> out({v.height(), v.width(), v.offsets()});
        float* p = out.mutable_data();
        for (int y = 0; y < v.height(); ++y)
            for (int x = 0; x < v.width(); ++x)
                for (float s : v.scores_at(y, x)) *p++ = s;
        return out;
    });
    m.def("lookup_local_at_flow", [](const hcv::FeatureMap& f1, const hcv::FeatureMap& f2,
                                     const hcv::FlowField& flow, int r) {
        return to_numpy(hcv::lookup_local_at_flow(f1, f2, flow, r));
    });
    m.def("lookup_global", [](const hcv::AggregatedCostVolume& h, const hcv::AggregatedCostVolume& v,
                              const hcv::FlowField& flow, int r) { return to_numpy(hcv::lookup_global(h, v, flow, r)); });
    m.def("refine_flow", [](const hcv::FeatureMap& f1, const hcv::FeatureMap& f2, const hcv::FlowField& seed,
                            int iters, int radius, float temperature, float damping, const std::string& lookup) {
        hcv::RefineOptions o;
        o.iters = iters;
        o.radius = radius;
        o.temperature = temperature;
        o.damping = damping;
        o.lookup = lookup == "fixed" ? hcv::LocalLookup::fixed : hcv::LocalLookup::recentred;
        return hcv::refine_flow(f1, f2, seed, o);
    }, py::arg("f1"), py::arg("f2"), py::arg("seed"), py::arg("iters") = 12, py::arg("radius") = 4,
       py::arg("temperature") = 1.0f, py::arg("damping") = 0.8f, py::arg("lookup") = "recentred");
    m.def("seed_from_init", [](const hcv::FlowField& f) { return hcv::seed_from_init(f); });
    m.def("upsample_flow", [](const hcv::FlowField& f, int h, int w) { return hcv::upsample_flow(f, h, w); },
          py::arg("flow"), py::arg("height") = 0, py::arg("width") = 0);

    // evaluation
    m.def("evaluate", [](const hcv::FlowField& pred, const hcv::FlowField& gt, std::optional<ByteArray> mask) {
        return report_dict(hcv::evaluate(pred, gt, mask_vector(mask)));
    }, py::arg("pred"), py::arg("gt"), py::arg("mask") = py::none());
    m.def("f1_all", [](const hcv::FlowField& pred, const hcv::FlowField& gt, std::optional<ByteArray> mask) {
        return hcv::f1_all(pred, gt, mask_vector(mask));
    }, py::arg("pred"), py::arg("gt"), py::arg("mask") = py::none());
    m.def("loss_init", [](const hcv::FlowField& a, const hcv::FlowField& gt) { return hcv::loss_init(a, gt); });
    m.def("loss_iter", [](const std::vector<hcv::FlowField>& seq, const hcv::FlowField& gt, double gamma) {
        return hcv::loss_iter(seq, gt, gamma);
    }, py::arg("sequence"), py::arg("gt"), py::arg("gamma") = 0.8);
    m.def("loss_total", &hcv::loss_total);

    // I/O
    m.def("read_flo", [](const std::filesystem::path& p) { return hcv::read_flo(p); });
    m.def("write_flo", [](const std::filesystem::path& p, const hcv::FlowField& f) { hcv::write_flo(p, f); });
    m.def("read_image", [](const std::filesystem::path& p) { return from_image(hcv::read_image(p)); });
    m.def("write_image", [](const std::filesystem::path& p, const ByteArray& a) { hcv::write_image(p, to_image(a)); });
    m.def("flow_to_color", [](const hcv::FlowField& f, std::optional<float> max_mag) {
        return from_image(hcv::flow_to_color(f, max_mag));
    }, py::arg("flow"), py::arg("max_magnitude") = py::none());

    // configuration, memory model and pipeline
    py::class_<hcv::RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("d_h", &hcv::RunConfig::d_h)
        .def_readwrite("d_v", &hcv::RunConfig::d_v)
        .def_readwrite("k", &hcv::RunConfig::k)
        .def_readwrite("l_r", &hcv::RunConfig::l_r)
        .def_readwrite("r_g", &hcv::RunConfig::r_g)
        .def_readwrite("iters", &hcv::RunConfig::iters)
        .def_readwrite("damping", &hcv::RunConfig::damping)
        .def_readwrite("temperature", &hcv::RunConfig::temperature)
        .def_readwrite("weights", &hcv::RunConfig::weights)
        .def_readwrite("threads", &hcv::RunConfig::threads)
        .def("set", &hcv::RunConfig::set);
    m.def("count_allpairs", [](int h, int w, int levels) { return plan_dict(hcv::count_allpairs(h, w, levels)); },
          py::arg("height"), py::arg("width"), py::arg("levels") = 1);
    m.def("count_hcv", [](int h, int w, const hcv::RunConfig& cfg) { return plan_dict(hcv::count_hcv(h, w, cfg)); },
          py::arg("height"), py::arg("width"), py::arg("config") = hcv::RunConfig{});
    m.def("make_synthetic_pair", [](int w, int h, int sx, int sy, std::uint64_t seed) {
        hcv::SyntheticPair p = hcv::make_synthetic_pair(w, h, sx, sy, seed);
        return py::make_tuple(from_image(p.first), from_image(p.second), p.gt);
    }, py::arg("width"), py::arg("height"), py::arg("shift_x"), py::arg("shift_y"), py::arg("seed"));
    m.def("estimate", [](const ByteArray& a, const ByteArray& b, const hcv::RunConfig& cfg) {
        hcv::EstimateResult r;
        {
            py::gil_scoped_release release;
            r = hcv::estimate(to_image(a), to_image(b), cfg);
        }
        return r.flow;
    }, py::arg("first"), py::arg("second"), py::arg("config") = hcv::RunConfig{});
    m.def("selfcheck", [](std::uint64_t seed) {
        std::ostringstream os;
        const bool ok = hcv::run_selfcheck(os, seed);
        return py::make_tuple(ok, os.str());
    }, py::arg("seed") = 1234);
}
