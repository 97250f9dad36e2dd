#include "pec/ngram.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace pec {

NGramModel::NGramModel(int n)
    : n_(n), tables_(static_cast<std::size_t>(n)), pending_(static_cast<std::size_t>(n)) {
  if (n < 2) throw ContractViolation("n-gram order must be >= 2");
}

bool NGramModel::empty() const { return tables_.empty() || tables_.front().empty(); }

const NGramModel::Successors* NGramModel::find(int m, std::span<const ContentId> context) const {
  const auto& t = tables_.at(m - 1);
  auto it = t.find(std::vector<ContentId>(context.begin(), context.end()));
  return it == t.end() ? nullptr : &it->second;
}

void NGramModel::add_count(std::span<const ContentId> context, ContentId next, std::uint64_t count) {
  pending_.at(context.size())[std::vector<ContentId>(context.begin(), context.end())][next] += count;
}

void NGramModel::freeze() {
  for (std::size_t m = 0; m < pending_.size(); ++m) {
    for (auto& [ctx, counts] : pending_[m]) {
      auto& succ = tables_[m][ctx];
      for (const auto& [c, k] : counts) {
        auto it = std::find_if(succ.counts.begin(), succ.counts.end(), [&](const auto& p) { return p.first == c; });
        if (it == succ.counts.end())
          succ.counts.emplace_back(c, k);
        else
          it->second += k;
        succ.total += k;
      }
    }
    pending_[m].clear();
  }
  for (auto& table : tables_)
    for (auto& [ctx, succ] : table)
      std::sort(succ.counts.begin(), succ.counts.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
      });
}

NGramModel build_ngram(const Trace& trace, int n, const ActiveSets* active) {
  NGramModel model(n);
  for (const auto& seq : user_sequences(trace, active)) {
    std::vector<ContentId> items;
    items.reserve(seq.size());
    for (const auto& r : seq) items.push_back(r.content);
    for (std::size_t p = 0; p < items.size(); ++p) {
      for (int m = 1; m <= n; ++m) {
        const std::size_t ctx_len = static_cast<std::size_t>(m - 1);
        if (p < ctx_len) break;
        model.add_count(std::span<const ContentId>(items.data() + p - ctx_len, ctx_len), items[p]);
      }
    }
  }
  model.freeze();
  return model;
}

std::vector<ScoredContent> ngram_topn(const NGramModel& model, std::span<const ContentId> history, int n_out) {
  if (n_out < 1) throw ContractViolation("n_out must be >= 1");
  std::vector<ScoredContent> out;
  if (model.empty()) return out;

  const int longest = std::min<int>(model.order(), static_cast<int>(history.size()) + 1);
  for (int m = longest; m >= 1; --m) {
    const std::size_t ctx_len = static_cast<std::size_t>(m - 1);
    const auto* succ = model.find(m, history.subspan(history.size() - ctx_len, ctx_len));
    if (!succ || succ->total == 0) continue;
    const double total = static_cast<double>(succ->total);
    for (const auto& [c, count] : succ->counts) {
      if (static_cast<int>(out.size()) == n_out) break;
      out.push_back({c, static_cast<double>(count) / total});
    }
    break;
  }
  return out;
}

void write_ngram_csv(const NGramModel& model, const Trace& names, std::ostream& out) {
  out << "order,context,content,count\n";
  for (int m = 1; m <= model.order(); ++m) {
    for (const auto& [ctx, succ] : model.table(m)) {
      std::string ctx_text;
      for (std::size_t i = 0; i < ctx.size(); ++i) ctx_text += (i ? " " : "") + names.name(ctx[i]);
      for (const auto& [c, count] : succ.counts) out << m << ',' << ctx_text << ',' << names.name(c) << ',' << count << '\n';
    }
  }
}

NGramModel read_ngram_csv(std::istream& in, const Trace& names) {
  std::string line;
  std::getline(in, line);
  int max_order = 0;
  struct Row {
    std::vector<ContentId> ctx;
    ContentId next;
    std::uint64_t count;
  };
  std::vector<Row> rows;
  std::size_t line_no = 1;
  auto lookup = [&](const std::string& name) {
    auto id = names.find_content(name);
    if (!id) throw ParseError("n-gram line " + std::to_string(line_no) + ": unknown content '" + name + "'");
    return *id;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string order_s, ctx_s, content_s, count_s;
    if (!std::getline(ss, order_s, ',') || !std::getline(ss, ctx_s, ',') || !std::getline(ss, content_s, ',') ||
        !std::getline(ss, count_s))
      throw ParseError("n-gram line " + std::to_string(line_no) + ": expected 4 fields");
    Row row;
    int order = std::stoi(order_s);
    std::stringstream cs(ctx_s);
    std::string tok;
    while (cs >> tok) row.ctx.push_back(lookup(tok));
    if (static_cast<int>(row.ctx.size()) != order - 1)
      throw ParseError("n-gram line " + std::to_string(line_no) + ": context length does not match order");
    row.next = lookup(content_s);
    row.count = std::stoull(count_s);
    max_order = std::max(max_order, order);
    rows.push_back(std::move(row));
  }
  NGramModel model(std::max(max_order, 2));
  for (const auto& r : rows) model.add_count(r.ctx, r.next, r.count);
  model.freeze();
  return model;
}

}  // namespace pec
