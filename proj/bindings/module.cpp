#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "goalex/collector.hpp"
#include "goalex/config.hpp"
#include "goalex/dataset.hpp"
#include "goalex/downstream.hpp"
#include "goalex/env_cube.hpp"
#include "goalex/env_grid.hpp"
#include "goalex/manifest.hpp"
#include "goalex/rnd.hpp"

namespace py = pybind11;
using namespace goalex;

namespace {

py::array_t<uint8_t> obs_to_array(const Observation& obs) {
  py::array_t<uint8_t> arr({obs.dims.h, obs.dims.w, obs.dims.c});
  std::memcpy(arr.mutable_data(), obs.data.data(), obs.data.size());
  return arr;
}

Observation array_to_obs(const py::array_t<uint8_t, py::array::c_style>& arr) {
  if (arr.ndim() != 3) throw ConfigError("observation array must be HxWxC");
  Observation obs;
  obs.dims = {static_cast<int>(arr.shape(0)), static_cast<int>(arr.shape(1)),
              static_cast<int>(arr.shape(2))};
  obs.data.assign(arr.data(), arr.data() + arr.size());
  return obs;
}

ActionVec to_action(const std::vector<float>& a) { return a; }

Config config_from_dict(const py::dict& d) {
  Config cfg;
  for (auto item : d) {
    cfg.set(py::str(item.first).cast<std::string>(), py::str(item.second).cast<std::string>());
  }
  return cfg;
}

// Env wrapper shared by the two environments.
template <typename E>
py::class_<E> bind_env(py::module_& m, const char* name) {
  return py::class_<E>(m, name)
      .def("reset",
           [](E& env) {
             Observation obs;
             Sidecar sc;
             env.reset(obs, sc);
             return py::make_tuple(obs_to_array(obs), sc);
           })
      .def("step",
           [](E& env, const std::vector<float>& action) {
             Observation obs;
             Sidecar sc;
             env.step(to_action(action), obs, sc);
             return py::make_tuple(obs_to_array(obs), sc);
           })
      .def("state_id", [](const E& env, const Sidecar& sc) { return env.state_id(sc); })
      .def("state_space_size", &E::state_space_size)
      .def("action_dim", &E::action_dim)
      .def("obs_dims", [](const E& env) {
        const ObsDims d = env.obs_dims();
        return py::make_tuple(d.h, d.w, d.c);
      });
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "goal-directed exploration for self-supervised dataset collection";
  m.attr("__version__") = kGoalexVersion;

  bind_env<GridEnv>(m, "GridEnv").def(py::init<int>(), py::arg("side") = 84);
  bind_env<CubeEnv>(m, "CubeEnv")
      .def(py::init([](int cells, float cell_cm, int image_side, float contact) {
             CubeParams p;
             p.cells = cells;
             p.cell_cm = cell_cm;
             p.image_side = image_side;
             p.contact = contact;
             return CubeEnv(p);
           }),
           py::arg("cells") = 12, py::arg("cell_cm") = 3.0f, py::arg("image_side") = 84,
           py::arg("contact") = 0.9f)
      .def("top_face", &CubeEnv::top_face);

  py::class_<RndPair>(m, "RndPair")
      .def(py::init([](const std::string& spec, int h, int w, int c, float lr,
                       uint64_t seed) {
             RngPool pool(seed);
             Rng t = pool.stream("rnd-target-init");
             Rng p = pool.stream("rnd-predictor-init");
             return RndPair(NetworkSpec::parse(spec), Shape3{h, w, c}, lr, t, p);
           }),
           py::arg("spec"), py::arg("h"), py::arg("w"), py::arg("c"),
           py::arg("lr") = 1e-4f, py::arg("seed") = 1)
      .def("novelty",
           [](const RndPair& pair, const py::array_t<float, py::array::c_style>& x) {
             if (x.ndim() != 3) throw ConfigError("novelty input must be HxWxC float32");
             Tensor t({1, static_cast<int>(x.shape(0)), static_cast<int>(x.shape(1)),
                       static_cast<int>(x.shape(2))});
             std::memcpy(t.ptr(), x.data(), sizeof(float) * static_cast<size_t>(x.size()));
             return pair.novelty(t);
           })
      .def("train",
           [](RndPair& pair, const py::array_t<float, py::array::c_style>& x, int epochs,
              int minibatch, uint64_t seed) {
             if (x.ndim() != 4) throw ConfigError("train input must be NxHxWxC float32");
             Tensor t({static_cast<int>(x.shape(0)), static_cast<int>(x.shape(1)),
                       static_cast<int>(x.shape(2)), static_cast<int>(x.shape(3))});
             std::memcpy(t.ptr(), x.data(), sizeof(float) * static_cast<size_t>(x.size()));
             Rng rng(seed);
             return pair.train(t, epochs, minibatch, rng);
           },
           py::arg("states"), py::arg("epochs") = 4, py::arg("minibatch") = 64,
           py::arg("seed") = 1)
      .def("target_hash", &RndPair::target_hash);

  m.def(
      "run_collection",
      [](const py::dict& config, const std::string& out_dir) {
        const CollectionConfig cc = collection_config_from(config_from_dict(config));
        RunResult res =
            out_dir.empty() ? run_collection(cc) : run_and_export(cc, out_dir);
        py::dict out;
        out["env"] = res.env_id;
        out["episodes"] = res.buffer.episode_count();
        out["transitions"] = res.buffer.transition_count();
        out["total_unique"] = res.coverage.total_unique;
        out["per_episode_unique"] = res.coverage.per_episode_unique;
        out["per_episode_novel"] = res.coverage.per_episode_novel;
        return out;
      },
      py::arg("config"), py::arg("out_dir") = std::string(),
      "Run a collection experiment; returns coverage statistics.");

  m.def(
      "load_dataset",
      [](const std::string& path) {
        const Dataset ds = import_dataset(path);
        const ObsDims dims = ds.buffer.dims();
        const int T = ds.buffer.horizon();
        const auto episodes = static_cast<int64_t>(ds.buffer.episode_count());
        py::array_t<uint8_t> obs(
            {episodes, static_cast<int64_t>(T + 1), static_cast<int64_t>(dims.h),
             static_cast<int64_t>(dims.w), static_cast<int64_t>(dims.c)});
        py::array_t<float> actions(
            {episodes, static_cast<int64_t>(T), static_cast<int64_t>(ds.buffer.action_dim())});
        py::array_t<float> sidecars(
            {episodes, static_cast<int64_t>(T + 1), static_cast<int64_t>(3)});
        for (int64_t e = 0; e < episodes; ++e) {
          const Episode& ep = ds.buffer.episode(static_cast<size_t>(e));
          std::memcpy(obs.mutable_data() + e * static_cast<int64_t>(ep.obs.size()),
                      ep.obs.data(), ep.obs.size());
          std::memcpy(actions.mutable_data() + e * static_cast<int64_t>(ep.actions.size()),
                      ep.actions.data(), ep.actions.size() * sizeof(float));
          std::memcpy(sidecars.mutable_data() + e * static_cast<int64_t>(ep.sidecars.size()),
                      ep.sidecars.data(), ep.sidecars.size() * sizeof(float));
        }
        py::dict out;
        out["env"] = ds.env_id;
        out["observations"] = obs;
        out["actions"] = actions;
        out["sidecars"] = sidecars;
        return out;
      },
      py::arg("path"), "Load a dataset container into numpy arrays.");

  m.def("push_reward", &push_reward, py::arg("cube_y_cm"), py::arg("rho") = 10.0f,
        py::arg("ty_cm") = 18.0f);

  m.def("render_grid", [](int x, int y, int rot, int side) {
    GridEnv env(side);
    return obs_to_array(env.render(GridState{x, y, rot}));
  }, py::arg("x"), py::arg("y"), py::arg("rot"), py::arg("side") = 84);

  m.def("observation_equal", [](const py::array_t<uint8_t, py::array::c_style>& a,
                                const py::array_t<uint8_t, py::array::c_style>& b) {
    return array_to_obs(a) == array_to_obs(b);
  });
}
