#include "fzsl/fedcore.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>

#include "fzsl/errors.hpp"
#include "fzsl/losses.hpp"
#include "fzsl/zsl_eval.hpp"

namespace fzsl {

int FedConfig::selection_size() const {
  int k = static_cast<int>(
      std::lround(static_cast<double>(num_clients) * client_fraction));
  return std::max(1, std::min(k, num_clients));
}

void FedConfig::validate() const {
  if (num_clients <= 0)
    throw std::invalid_argument("config: num_clients must be positive");
  if (!(client_fraction > 0.0f) || client_fraction > 1.0f)
    throw std::invalid_argument("config: client_fraction must be in (0,1]");
  if (local_epochs <= 0)
    throw std::invalid_argument("config: local_epochs must be positive");
  if (rounds < 0) throw std::invalid_argument("config: rounds must be >= 0");
  if (beta < 0.0f) throw std::invalid_argument("config: beta must be >= 0");
  if (cls_pretrain_epochs <= 0)
    throw std::invalid_argument("config: cls_pretrain_epochs must be positive");
  if (!(cls_learning_rate > 0.0f))
    throw std::invalid_argument("config: cls_learning_rate must be positive");
  if (batch_size <= 0)
    throw std::invalid_argument("config: batch_size must be positive");
  if (!(learning_rate > 0.0f))
    throw std::invalid_argument("config: learning_rate must be positive");
  if (n_critic <= 0)
    throw std::invalid_argument("config: n_critic must be positive");
  if (!(gp_lambda >= 0.0f))
    throw std::invalid_argument("config: gp_lambda must be >= 0");
  if (synth_per_class <= 0)
    throw std::invalid_argument("config: synth_per_class must be positive");
  if (hidden_dim <= 0)
    throw std::invalid_argument("config: hidden_dim must be positive");
  if (noise_dim < 0)
    throw std::invalid_argument("config: noise_dim must be >= 0");
  if (eval_every < 0)
    throw std::invalid_argument("config: eval_every must be >= 0");
  if (eval_epochs <= 0)
    throw std::invalid_argument("config: eval_epochs must be positive");
  if (!(eval_learning_rate > 0.0f))
    throw std::invalid_argument("config: eval_learning_rate must be positive");
  ska.validate();
}

const char* aggregation_mode_name(AggregationMode mode) {
  return mode == AggregationMode::Holistic ? "holistic" : "generator_only";
}

std::optional<AggregationMode> aggregation_mode_from(const std::string& name) {
  if (name == "holistic") return AggregationMode::Holistic;
  if (name == "generator_only") return AggregationMode::GeneratorOnly;
  return std::nullopt;
}

std::vector<int> select_clients(int num_clients, float fraction, int round,
                                uint64_t global_seed) {
  if (num_clients <= 0)
    throw std::invalid_argument("select_clients: num_clients must be positive");
  if (!(fraction > 0.0f) || fraction > 1.0f)
    throw std::invalid_argument("select_clients: fraction must be in (0,1]");
  int k = static_cast<int>(
      std::lround(static_cast<double>(num_clients) * fraction));
  k = std::max(1, std::min(k, num_clients));
  RngStream rng = derive_rng(global_seed, round, kServerId, "select");
  std::vector<int> ids(static_cast<size_t>(num_clients));
  std::iota(ids.begin(), ids.end(), 0);
  for (int i = 0; i < k; ++i) {
    size_t j =
        static_cast<size_t>(i) +
        rng.next_below(static_cast<uint64_t>(num_clients - i));
    std::swap(ids[static_cast<size_t>(i)], ids[j]);
  }
  ids.resize(static_cast<size_t>(k));
  std::sort(ids.begin(), ids.end());
  return ids;
}

namespace {

// Mean of matching tensors with double accumulation, ascending input order.
Matrix mean_of(const std::vector<const Matrix*>& ms) {
  Matrix out(ms[0]->rows, ms[0]->cols);
  const double inv = 1.0 / static_cast<double>(ms.size());
  for (size_t i = 0; i < out.data.size(); ++i) {
    double s = 0.0;
    for (const Matrix* m : ms) s += static_cast<double>(m->data[i]);
    out.data[i] = static_cast<float>(s * inv);
  }
  return out;
}

MlpParams mean_mlp(const std::vector<const MlpParams*>& ps) {
  const MlpParams& first = *ps[0];
  for (const MlpParams* p : ps) {
    if (!p->w1.same_shape(first.w1) || !p->w2.same_shape(first.w2) ||
        p->hidden_act != first.hidden_act || p->output_act != first.output_act)
      throw std::invalid_argument("aggregate: architecture mismatch");
  }
  MlpParams out = first;
  auto collect = [&](auto member) {
    std::vector<const Matrix*> ms;
    ms.reserve(ps.size());
    for (const MlpParams* p : ps) ms.push_back(&(p->*member));
    return mean_of(ms);
  };
  out.w1 = collect(&MlpParams::w1);
  out.b1 = collect(&MlpParams::b1);
  out.w2 = collect(&MlpParams::w2);
  out.b2 = collect(&MlpParams::b2);
  return out;
}

}  // namespace

GlobalModel aggregate(const std::vector<const GanModel*>& models,
                      AggregationMode mode) {
  if (models.empty())
    throw std::invalid_argument("aggregate: no models selected");
  GlobalModel g;
  g.noise_dim = models[0]->noise_dim;
  for (const GanModel* m : models)
    if (m->noise_dim != g.noise_dim)
      throw std::invalid_argument("aggregate: architecture mismatch");
  std::vector<const MlpParams*> gens;
  gens.reserve(models.size());
  for (const GanModel* m : models) gens.push_back(&m->generator);
  g.generator = mean_mlp(gens);
  if (mode == AggregationMode::Holistic) {
    std::vector<const MlpParams*> discs;
    discs.reserve(models.size());
    for (const GanModel* m : models) discs.push_back(&m->discriminator);
    g.discriminator = mean_mlp(discs);
  }
  return g;
}

void broadcast(const GlobalModel& global, std::vector<ClientState>& clients,
               AggregationMode mode) {
  if (mode == AggregationMode::Holistic && !global.discriminator)
    throw std::invalid_argument(
        "broadcast: holistic mode requires a global discriminator");
  for (ClientState& c : clients) {
    if (c.model.generator.w1.rows != global.generator.w1.rows ||
        c.model.generator.w1.cols != global.generator.w1.cols)
      throw std::invalid_argument("broadcast: generator shape mismatch");
    c.model.generator = global.generator;
    if (mode == AggregationMode::Holistic)
      c.model.discriminator = *global.discriminator;
  }
}

int64_t transmitted_params_per_round(const GanModel& arch,
                                     AggregationMode mode, int num_selected,
                                     int num_clients) {
  int64_t payload = arch.generator.param_count();
  if (mode == AggregationMode::Holistic)
    payload += arch.discriminator.param_count();
  return payload * (static_cast<int64_t>(num_selected) + num_clients);
}

LinearClassifier pretrain_local_classifier(const Dataset& ds,
                                           const ClientPartition& part,
                                           int epochs, float learning_rate,
                                           int num_seen_classes) {
  if (part.row_indices.empty() || part.class_subset.empty())
    throw std::invalid_argument("pretrain: client " +
                                std::to_string(part.client_id) +
                                " has no data");
  Matrix x(static_cast<int>(part.row_indices.size()), ds.feature_dim());
  std::vector<int> y(part.row_indices.size());
  for (size_t i = 0; i < part.row_indices.size(); ++i) {
    int row = part.row_indices[i];
    const float* src = ds.features.row(row);
    std::copy(src, src + ds.feature_dim(), x.row(static_cast<int>(i)));
    int idx = ds.seen_index(ds.labels[static_cast<size_t>(row)]);
    if (idx < 0)
      throw std::invalid_argument("pretrain: row labeled with unseen class");
    y[i] = idx;
  }
  return train_linear_classifier(x, y, num_seen_classes, epochs,
                                 learning_rate);
}

namespace {

struct BatchData {
  Matrix features;          // B x d
  Matrix attributes;        // B x m, ground-truth rows
  std::vector<int> seen_idx;  // labels as seen-class indices
  std::vector<std::string> names;
};

BatchData gather_batch(const Dataset& ds, const std::vector<int>& rows) {
  BatchData b;
  const int n = static_cast<int>(rows.size());
  b.features = Matrix(n, ds.feature_dim());
  b.attributes = Matrix(n, ds.attr_dim());
  b.seen_idx.resize(static_cast<size_t>(n));
  b.names.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    int r = rows[static_cast<size_t>(i)];
    const float* src = ds.features.row(r);
    std::copy(src, src + ds.feature_dim(), b.features.row(i));
    int lab = ds.labels[static_cast<size_t>(r)];
    const float* attr = ds.attributes.row(lab);
    std::copy(attr, attr + ds.attr_dim(), b.attributes.row(i));
    b.seen_idx[static_cast<size_t>(i)] = ds.seen_index(lab);
    b.names[static_cast<size_t>(i)] = ds.class_names[static_cast<size_t>(lab)];
  }
  return b;
}

// Generator condition rows; with SKA on this draws fresh embedding noise per
// row, so every generated sample sees its own perturbation.
Matrix make_condition(const BatchData& batch, const FedConfig& config,
                      const EmbeddingTable* embeddings, RngStream& rng) {
  if (!config.ska.enabled) return batch.attributes;
  const int de = embeddings->embed_dim();
  const int m = batch.attributes.cols;
  Matrix cond(batch.features.rows, de + m);
  for (int i = 0; i < batch.features.rows; ++i) {
    const std::vector<float>* emb =
        embeddings->find(batch.names[static_cast<size_t>(i)]);
    if (!emb)
      throw std::invalid_argument("ska: no embedding for class '" +
                                  batch.names[static_cast<size_t>(i)] + "'");
    std::vector<float> attr(batch.attributes.row(i),
                            batch.attributes.row(i) + m);
    std::vector<float> a = augment_attribute(*emb, attr, config.ska, rng);
    std::copy(a.begin(), a.end(), cond.row(i));
  }
  return cond;
}

Matrix draw_noise(int rows, int cols, RngStream& rng) {
  Matrix z(rows, cols);
  for (float& v : z.data) v = rng.next_normal();
  return z;
}

}  // namespace

LocalTrainStats local_train(ClientState& state, const Dataset& ds,
                            const FedConfig& config,
                            const EmbeddingTable* embeddings, int round) {
  if (config.ska.enabled && embeddings == nullptr)
    throw std::invalid_argument("local_train: ska enabled without embeddings");
  const auto& rows = state.partition.row_indices;
  if (rows.empty())
    throw std::invalid_argument("local_train: client has no rows");

  RngStream rng = derive_rng(config.global_seed, round,
                             state.partition.client_id, "train");
  const int noise_dim = state.model.noise_dim;
  LocalTrainStats stats;
  double critic_sum = 0.0, gen_sum = 0.0, cls_sum = 0.0;

  try {
    for (int epoch = 0; epoch < config.local_epochs; ++epoch) {
      // Epoch batch plan: shuffled chunks, the trailing short batch kept;
      // clients smaller than one batch sample with replacement instead.
      std::vector<std::vector<int>> batches;
      if (static_cast<int>(rows.size()) >= config.batch_size) {
        std::vector<int> order = rows;
        for (size_t i = order.size(); i > 1; --i) {
          size_t j = rng.next_below(i);
          std::swap(order[i - 1], order[j]);
        }
        for (size_t start = 0; start < order.size();
             start += static_cast<size_t>(config.batch_size)) {
          size_t end = std::min(order.size(),
                                start + static_cast<size_t>(config.batch_size));
          batches.emplace_back(order.begin() + static_cast<long>(start),
                               order.begin() + static_cast<long>(end));
        }
      } else {
        std::vector<int> b(static_cast<size_t>(config.batch_size));
        for (int& r : b)
          r = rows[rng.next_below(static_cast<uint64_t>(rows.size()))];
        batches.push_back(std::move(b));
      }

      for (const auto& batch_rows : batches) {
        BatchData batch = gather_batch(ds, batch_rows);
        const int b = batch.features.rows;
        const float inv_b = 1.0f / static_cast<float>(b);

        for (int step = 0; step < config.n_critic; ++step) {
          Matrix cond = make_condition(batch, config, embeddings, rng);
          Matrix z = draw_noise(b, noise_dim, rng);
          Matrix fake = mlp_forward(state.model.generator, hcat(z, cond));

          Matrix real_in = hcat(batch.features, batch.attributes);
          Matrix fake_in = hcat(fake, batch.attributes);
          Matrix d_real = mlp_forward(state.model.discriminator, real_in);
          Matrix d_fake = mlp_forward(state.model.discriminator, fake_in);
          WassersteinResult wl = wasserstein_losses(d_real.data, d_fake.data);

          Matrix d_real_grad(b, 1, -inv_b);
          Matrix d_fake_grad(b, 1, inv_b);
          MlpGrads grads =
              mlp_backward(state.model.discriminator, real_in, d_real_grad)
                  .grads;
          grads.add_scaled(
              mlp_backward(state.model.discriminator, fake_in, d_fake_grad)
                  .grads,
              1.0f);
          GradientPenaltyResult gp = gradient_penalty(
              state.model.discriminator, batch.features, fake,
              batch.attributes, rng);
          grads.add_scaled(gp.critic_grads, config.gp_lambda);
          adam_step(state.model.discriminator, grads,
                    state.discriminator_opt);

          float critic_loss =
              wl.critic_term + config.gp_lambda * gp.penalty;
          if (!std::isfinite(critic_loss))
            throw NumericError("non-finite critic loss");
          critic_sum += critic_loss;
        }

        Matrix cond = make_condition(batch, config, embeddings, rng);
        Matrix z = draw_noise(b, noise_dim, rng);
        Matrix gen_in = hcat(z, cond);
        Matrix fake = mlp_forward(state.model.generator, gen_in);
        Matrix fake_in = hcat(fake, batch.attributes);
        Matrix d_fake = mlp_forward(state.model.discriminator, fake_in);

        Matrix d_fake_grad(b, 1, -inv_b);
        MlpBackwardResult through_d =
            mlp_backward(state.model.discriminator, fake_in, d_fake_grad);
        Matrix fake_grad =
            slice_cols(through_d.input_grad, 0, ds.feature_dim());

        float cls_loss = 0.0f;
        if (config.beta != 0.0f) {
          Matrix logits = state.cls_head.logits(fake);
          SoftmaxXentResult ce =
              softmax_cross_entropy(logits, batch.seen_idx);
          cls_loss = ce.loss;
          Matrix cls_grad =
              classifier_input_gradient(state.cls_head, ce.logit_grads);
          for (size_t i = 0; i < fake_grad.data.size(); ++i)
            fake_grad.data[i] += config.beta * cls_grad.data[i];
        }

        MlpGrads g_grads =
            mlp_backward(state.model.generator, gen_in, fake_grad).grads;
        adam_step(state.model.generator, g_grads, state.generator_opt);

        float gen_loss = -0.0f;
        {
          float mean_fake = 0.0f;
          for (float v : d_fake.data) mean_fake += v;
          gen_loss = -(mean_fake * inv_b);
        }
        if (!std::isfinite(gen_loss) || !std::isfinite(cls_loss))
          throw NumericError("non-finite generator loss");
        gen_sum += gen_loss;
        cls_sum += cls_loss;
        stats.steps += 1;
      }
    }
  } catch (const NumericError& e) {
    throw NumericError("round " + std::to_string(round) + " client " +
                       std::to_string(state.partition.client_id) + ": " +
                       e.what());
  }

  int critic_steps = stats.steps * config.n_critic;
  stats.mean_critic_loss =
      critic_steps ? static_cast<float>(critic_sum / critic_steps) : 0.0f;
  stats.mean_generator_loss =
      stats.steps ? static_cast<float>(gen_sum / stats.steps) : 0.0f;
  stats.mean_cls_loss =
      stats.steps ? static_cast<float>(cls_sum / stats.steps) : 0.0f;
  return stats;
}

FederationResult run_federation(const Dataset& ds,
                                const std::vector<ClientPartition>& partitions,
                                const FedConfig& config,
                                const EmbeddingTable* embeddings,
                                ExecOptions exec) {
  config.validate();
  ds.validate();
  validate_partitions(ds, partitions);
  if (static_cast<int>(partitions.size()) != config.num_clients)
    throw std::invalid_argument("run_federation: partition count " +
                                std::to_string(partitions.size()) +
                                " != num_clients " +
                                std::to_string(config.num_clients));
  if (config.ska.enabled) {
    if (embeddings == nullptr)
      throw std::invalid_argument("run_federation: ska requires embeddings");
    for (int cls : ds.seen_classes)
      if (!embeddings->find(ds.class_names[static_cast<size_t>(cls)]))
        throw std::invalid_argument(
            "run_federation: missing embedding for seen class '" +
            ds.class_names[static_cast<size_t>(cls)] + "'");
  }

  const int m = ds.attr_dim();
  const int noise_dim = config.noise_dim > 0 ? config.noise_dim : m;
  const int cond_dim =
      config.ska.enabled ? embeddings->embed_dim() + m : m;

  RngStream g_rng = derive_rng(config.global_seed, 0, kServerId, "init_g");
  RngStream d_rng = derive_rng(config.global_seed, 0, kServerId, "init_d");
  GanModel initial = gan_init(ds.feature_dim(), m, cond_dim, noise_dim,
                              config.hidden_dim, g_rng, d_rng);

  const int num_seen = static_cast<int>(ds.seen_classes.size());
  FederationResult result;
  result.global = GlobalModel{initial.generator, initial.discriminator,
                              noise_dim};
  result.clients.reserve(partitions.size());
  for (const ClientPartition& part : partitions) {
    ClientState st;
    st.partition = part;
    st.model = initial;
    st.cls_head =
        pretrain_local_classifier(ds, part, config.cls_pretrain_epochs,
                                  config.cls_learning_rate, num_seen);
    AdamConfig opt{config.learning_rate, 0.5f, 0.999f, 1e-8f};
    st.generator_opt = adam_state_for(st.model.generator, opt);
    st.discriminator_opt = adam_state_for(st.model.discriminator, opt);
    result.clients.push_back(std::move(st));
  }

  for (int t = 1; t <= config.rounds; ++t) {
    auto started = std::chrono::steady_clock::now();
    std::vector<int> selected = select_clients(
        config.num_clients, config.client_fraction, t, config.global_seed);

    std::vector<LocalTrainStats> stats(selected.size());
    if (exec.parallel_clients && selected.size() > 1) {
      std::vector<std::future<LocalTrainStats>> futures;
      futures.reserve(selected.size());
      for (int id : selected) {
        ClientState& st = result.clients[static_cast<size_t>(id)];
        futures.push_back(std::async(std::launch::async, [&st, &ds, &config,
                                                          embeddings, t] {
          return local_train(st, ds, config, embeddings, t);
        }));
      }
      for (size_t i = 0; i < futures.size(); ++i) stats[i] = futures[i].get();
    } else {
      for (size_t i = 0; i < selected.size(); ++i)
        stats[i] = local_train(result.clients[static_cast<size_t>(selected[i])],
                               ds, config, embeddings, t);
    }

    std::vector<const GanModel*> models;
    models.reserve(selected.size());
    for (int id : selected)
      models.push_back(&result.clients[static_cast<size_t>(id)].model);
    GlobalModel agg = aggregate(models, config.aggregation_mode);
    broadcast(agg, result.clients, config.aggregation_mode);
    result.global.generator = agg.generator;
    if (agg.discriminator) result.global.discriminator = agg.discriminator;

    RoundMetrics rm;
    rm.round = t;
    rm.selected_clients = selected;
    for (const LocalTrainStats& s : stats) {
      rm.mean_critic_loss += s.mean_critic_loss;
      rm.mean_generator_loss += s.mean_generator_loss;
      rm.mean_cls_loss += s.mean_cls_loss;
    }
    rm.mean_critic_loss /= static_cast<float>(stats.size());
    rm.mean_generator_loss /= static_cast<float>(stats.size());
    rm.mean_cls_loss /= static_cast<float>(stats.size());
    rm.uploaded_params = (static_cast<int64_t>(selected.size())) *
                         (initial.generator.param_count() +
                          (config.aggregation_mode == AggregationMode::Holistic
                               ? initial.discriminator.param_count()
                               : 0));
    rm.downloaded_params = static_cast<int64_t>(config.num_clients) *
                           (initial.generator.param_count() +
                            (config.aggregation_mode ==
                                     AggregationMode::Holistic
                                 ? initial.discriminator.param_count()
                                 : 0));

    if (config.eval_every > 0 && t % config.eval_every == 0) {
      RngStream eval_rng = derive_rng(config.global_seed, t, kServerId, "eval");
      EvalConfig ec;
      ec.per_class = config.synth_per_class;
      ec.ska = config.ska;
      ec.epochs = config.eval_epochs;
      ec.learning_rate = config.eval_learning_rate;
      EvalReport report = evaluate_unseen(result.global.generator, ds,
                                          embeddings, ec, eval_rng);
      rm.unseen_top1 = static_cast<float>(report.top1);
    }

    rm.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - started)
                          .count();
    result.metrics.push_back(std::move(rm));
  }

  return result;
}

}  // namespace fzsl
