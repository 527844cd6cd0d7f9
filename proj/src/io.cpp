#include "dsmt/io.hpp"

#include "dsmt/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace fs = std::filesystem;

namespace dsmt {

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        const std::size_t start = i;
        while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        if (i > start) out.push_back(line.substr(start, i - start));
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <class T>
std::optional<T> parse_number(std::string_view s) {
    T value{};
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || first == s.data() + s.size()) return std::nullopt;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(value)) return std::nullopt;
    }
    return value;
}

class LineContext {
public:
    LineContext(std::string file, int line) : file_(std::move(file)), line_(line) {}

    [[noreturn]] void fail(const std::string& what) const {
        throw DataError(file_ + " line " + std::to_string(line_) + ": " + what);
    }
    double real(std::string_view s, const char* field) const {
        auto v = parse_number<double>(s);
        if (!v) fail(std::string("bad ") + field + " '" + std::string(s) + "'");
        return *v;
    }
    template <class I>
    I integer(std::string_view s, const char* field) const {
        auto v = parse_number<I>(s);
        if (!v) fail(std::string("bad ") + field + " '" + std::string(s) + "'");
        return *v;
    }

private:
    std::string file_;
    int line_;
};

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void for_each_line(std::istream& in, const std::function<void(std::string_view, int)>& fn) {
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        fn(line, number);
    }
}

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

} // namespace

std::string format_real(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw DataError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// KITTI labels

std::vector<KittiLabel> parse_kitti_labels(std::istream& in, const LabelFilter& filter) {
    std::vector<KittiLabel> out;
    for_each_line(in, [&](std::string_view line, int number) {
        const LineContext ctx("labels", number);
        const auto f = split_ws(line);
        if (f.size() != 17 && f.size() != 18) {
            ctx.fail("expected 17 or 18 fields, got " + std::to_string(f.size()));
        }
        KittiLabel l;
        l.frame = ctx.integer<int>(f[0], "frame");
        l.track_id = ctx.integer<int>(f[1], "track id");
        l.type = std::string(f[2]);
        l.truncated = ctx.real(f[3], "truncated");
        l.occluded = ctx.real(f[4], "occluded");
        l.alpha = ctx.real(f[5], "alpha");
        l.bbox = {ctx.real(f[6], "left"), ctx.real(f[7], "top"), ctx.real(f[8], "right"), ctx.real(f[9], "bottom")};
        l.height = ctx.real(f[10], "height");
        l.width = ctx.real(f[11], "width");
        l.length = ctx.real(f[12], "length");
        l.x = ctx.real(f[13], "x");
        l.y = ctx.real(f[14], "y");
        l.z = ctx.real(f[15], "z");
        l.rotation_y = ctx.real(f[16], "rotation_y");
        if (f.size() == 18) l.score = ctx.real(f[17], "score");
        if (l.frame < 0) ctx.fail("negative frame");
        const bool keep = l.type == "DontCare" ||
                          std::find(filter.types.begin(), filter.types.end(), l.type) != filter.types.end();
        if (keep) out.push_back(std::move(l));
    });
    std::stable_sort(out.begin(), out.end(), [](const KittiLabel& a, const KittiLabel& b) { return a.frame < b.frame; });
    return out;
}

std::vector<KittiLabel> read_kitti_labels(const fs::path& path, const LabelFilter& filter) {
    auto in = open_input(path);
    try {
        return parse_kitti_labels(in, filter);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_kitti_labels(const std::vector<KittiLabel>& labels) {
    std::string out;
    for (const auto& l : labels) {
        out += std::to_string(l.frame) + ' ' + std::to_string(l.track_id) + ' ' + l.type;
        for (double v : {l.truncated, l.occluded, l.alpha, l.bbox.left, l.bbox.top, l.bbox.right, l.bbox.bottom,
                         l.height, l.width, l.length, l.x, l.y, l.z, l.rotation_y}) {
            out += ' ' + format_real(v);
        }
        if (l.score) out += ' ' + format_real(*l.score);
        out += '\n';
    }
    return out;
}

void write_kitti_labels(const fs::path& path, const std::vector<KittiLabel>& labels) {
    write_file_atomic(path, format_kitti_labels(labels));
}

Box3D kitti_to_ego(const KittiLabel& l) {
    Box3D b;
    b.center_x = l.z;
    b.center_y = -l.x;
    b.center_z = -l.y + 0.5 * l.height;
    b.length = l.length;
    b.width = l.width;
    b.height = l.height;
    b.yaw = wrap_angle(-l.rotation_y - 0.5 * kPi);
    return b;
}

TrackedBox kitti_to_tracked(const KittiLabel& l) {
    TrackedBox t;
    t.frame_idx = l.frame;
    t.track_id = l.track_id;
    t.box2d = l.bbox;
    t.box3d = kitti_to_ego(l);
    t.score = l.score.value_or(1.0);
    t.dont_care = l.type == "DontCare";
    return t;
}

KittiLabel tracked_to_kitti(const TrackedBox& box, std::string type) {
    KittiLabel l;
    l.frame = box.frame_idx;
    l.track_id = box.track_id;
    l.type = box.dont_care ? "DontCare" : std::move(type);
    l.truncated = -1.0;
    l.occluded = -1.0;
    l.bbox = box.box2d;
    l.height = box.box3d.height;
    l.width = box.box3d.width;
    l.length = box.box3d.length;
    l.x = -box.box3d.center_y;
    l.y = -(box.box3d.center_z - 0.5 * box.box3d.height);
    l.z = box.box3d.center_x;
    l.rotation_y = wrap_angle(-box.box3d.yaw - 0.5 * kPi);
    l.alpha = wrap_angle(l.rotation_y - std::atan2(l.x, l.z));
    l.score = box.score;
    return l;
}

// ---------------------------------------------------------------------------
// Detections, ego motion, calibration

std::vector<Detection> parse_detections(std::istream& in, const AppearanceShape& shape) {
    if (shape.blocks <= 0 || shape.block_length <= 0) throw ConfigError("appearance shape must be positive");
    const std::size_t dim = static_cast<std::size_t>(shape.blocks) * static_cast<std::size_t>(shape.block_length);
    const std::size_t expected = 13 + dim;
    std::vector<Detection> out;
    for_each_line(in, [&](std::string_view line, int number) {
        const LineContext ctx("detections", number);
        const auto f = split_ws(line);
        if (f.size() != expected) {
            ctx.fail("expected " + std::to_string(expected) + " fields (13 + " + std::to_string(dim) +
                     " appearance values), got " + std::to_string(f.size()));
        }
        Detection d;
        d.frame_idx = ctx.integer<int>(f[0], "frame");
        if (d.frame_idx < 0) ctx.fail("negative frame");
        d.det_id = ctx.integer<DetId>(f[1], "det_id");
        auto& b = d.box3d;
        b.center_x = ctx.real(f[2], "center_x");
        b.center_y = ctx.real(f[3], "center_y");
        b.center_z = ctx.real(f[4], "center_z");
        b.length = ctx.real(f[5], "length");
        b.width = ctx.real(f[6], "width");
        b.height = ctx.real(f[7], "height");
        b.yaw = ctx.real(f[8], "yaw");
        d.box2d = {ctx.real(f[9], "left"), ctx.real(f[10], "top"), ctx.real(f[11], "right"), ctx.real(f[12], "bottom")};
        std::vector<double> values(dim);
        for (std::size_t i = 0; i < dim; ++i) values[i] = ctx.real(f[13 + i], "appearance value");
        d.appearance = Appearance(static_cast<std::size_t>(shape.blocks), static_cast<std::size_t>(shape.block_length),
                                  std::move(values));
        try {
            b.validate();
            d.box2d.validate();
        } catch (const StructuralError& e) {
            ctx.fail(e.what());
        }
        out.push_back(std::move(d));
    });
    return out;
}

std::vector<Detection> read_detections(const fs::path& path, const AppearanceShape& shape) {
    auto in = open_input(path);
    try {
        return parse_detections(in, shape);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string format_detections(const std::vector<Detection>& detections) {
    std::string out;
    for (const auto& d : detections) {
        out += std::to_string(d.frame_idx) + ' ' + std::to_string(d.det_id);
        const auto& b = d.box3d;
        for (double v : {b.center_x, b.center_y, b.center_z, b.length, b.width, b.height, b.yaw, d.box2d.left,
                         d.box2d.top, d.box2d.right, d.box2d.bottom}) {
            out += ' ' + g17(v);
        }
        for (double v : d.appearance.values()) out += ' ' + g17(v);
        out += '\n';
    }
    return out;
}

void write_detections(const fs::path& path, const std::vector<Detection>& detections) {
    write_file_atomic(path, format_detections(detections));
}

std::vector<EgoMotion> read_ego(const fs::path& path) {
    auto in = open_input(path);
    std::vector<EgoMotion> out;
    for_each_line(in, [&](std::string_view line, int number) {
        const LineContext ctx(path.string(), number);
        const auto f = split_ws(line);
        if (f.size() != 4) ctx.fail("expected 4 fields (frame vx vy dt), got " + std::to_string(f.size()));
        const int frame = ctx.integer<int>(f[0], "frame");
        if (frame != static_cast<int>(out.size())) {
            ctx.fail("expected frame " + std::to_string(out.size()) + ", got " + std::to_string(frame));
        }
        EgoMotion e{ctx.real(f[1], "vx"), ctx.real(f[2], "vy"), ctx.real(f[3], "dt")};
        if (!(e.frame_dt > 0.0)) ctx.fail("dt must be positive");
        out.push_back(e);
    });
    return out;
}

std::string format_ego(const std::vector<EgoMotion>& ego) {
    std::string out;
    for (std::size_t i = 0; i < ego.size(); ++i) {
        out += std::to_string(i) + ' ' + g17(ego[i].vx) + ' ' + g17(ego[i].vy) + ' ' + g17(ego[i].frame_dt) + '\n';
    }
    return out;
}

CameraModel read_calib(const fs::path& path) {
    auto in = open_input(path);
    CameraModel cam;
    std::map<std::string, double*> fields{{"focal_u", &cam.focal_u},         {"focal_v", &cam.focal_v},
                                          {"principal_u", &cam.principal_u}, {"principal_v", &cam.principal_v},
                                          {"image_width", &cam.image_width}, {"image_height", &cam.image_height}};
    std::set<std::string> seen;
    for_each_line(in, [&](std::string_view line, int number) {
        const LineContext ctx(path.string(), number);
        const auto f = split_ws(line);
        if (f.size() != 2) ctx.fail("expected `key value`");
        const std::string key(f[0]);
        auto it = fields.find(key);
        if (it == fields.end()) ctx.fail("unknown calibration key '" + key + "'");
        if (!seen.insert(key).second) ctx.fail("duplicate calibration key '" + key + "'");
        *it->second = ctx.real(f[1], key.c_str());
    });
    for (const auto& [key, _] : fields) {
        if (!seen.count(key)) throw DataError(path.string() + ": missing calibration key '" + key + "'");
    }
    try {
        cam.validate();
    } catch (const StructuralError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
    return cam;
}

std::string format_calib(const CameraModel& c) {
    return "focal_u " + g17(c.focal_u) + "\nfocal_v " + g17(c.focal_v) + "\nprincipal_u " + g17(c.principal_u) +
           "\nprincipal_v " + g17(c.principal_v) + "\nimage_width " + g17(c.image_width) + "\nimage_height " +
           g17(c.image_height) + "\n";
}

// ---------------------------------------------------------------------------
// Sequences and datasets

void write_sequence(const fs::path& dir, const LabeledSequence& seq) {
    fs::create_directories(dir);
    std::vector<Detection> all;
    for (const auto& frame : seq.sequence.frames) all.insert(all.end(), frame.begin(), frame.end());
    write_detections(dir / "detections.txt", all);
    write_file_atomic(dir / "ego.txt", format_ego(seq.sequence.ego));
    write_file_atomic(dir / "calib.txt", format_calib(seq.sequence.camera));
    std::vector<KittiLabel> labels;
    for (const auto& b : seq.ground_truth) labels.push_back(tracked_to_kitti(b));
    for (auto& l : labels) l.score.reset();
    write_kitti_labels(dir / "labels.txt", labels);
}

LabeledSequence read_sequence(const fs::path& dir, const AppearanceShape& shape, const LabelFilter& filter) {
    LabeledSequence out;
    out.name = dir.filename().string();
    auto& seq = out.sequence;
    seq.camera = read_calib(dir / "calib.txt");
    seq.ego = read_ego(dir / "ego.txt");
    seq.frames.resize(seq.ego.size());
    std::set<DetId> ids;
    for (auto& d : read_detections(dir / "detections.txt", shape)) {
        if (d.frame_idx >= static_cast<int>(seq.frames.size())) {
            throw DataError((dir / "detections.txt").string() + ": detection " + std::to_string(d.det_id) +
                            " is in frame " + std::to_string(d.frame_idx) + " but ego.txt has " +
                            std::to_string(seq.frames.size()) + " frames");
        }
        if (!ids.insert(d.det_id).second) {
            throw DataError((dir / "detections.txt").string() + ": duplicate det_id " + std::to_string(d.det_id));
        }
        seq.frames[static_cast<std::size_t>(d.frame_idx)].push_back(std::move(d));
    }
    if (fs::exists(dir / "labels.txt")) {
        for (const auto& l : read_kitti_labels(dir / "labels.txt", filter)) out.ground_truth.push_back(kitti_to_tracked(l));
    }
    try {
        seq.validate();
    } catch (const StructuralError& e) {
        throw DataError(dir.string() + ": " + e.what());
    }
    return out;
}

void write_dataset(const fs::path& dir, std::span<const LabeledSequence> sequences) {
    fs::create_directories(dir);
    for (const auto& s : sequences) {
        if (s.name.empty()) throw StructuralError("sequence needs a name to be written");
        write_sequence(dir / s.name, s);
    }
}

std::vector<LabeledSequence> read_dataset(const fs::path& dir, const AppearanceShape& shape, const LabelFilter& filter) {
    if (!fs::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
    if (fs::exists(dir / "detections.txt")) return {read_sequence(dir, shape, filter)};
    std::vector<fs::path> subdirs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_directory() && fs::exists(entry.path() / "detections.txt")) subdirs.push_back(entry.path());
    }
    if (subdirs.empty()) throw DataError(dir.string() + " contains no sequence directories");
    std::sort(subdirs.begin(), subdirs.end());
    std::vector<LabeledSequence> out;
    for (const auto& p : subdirs) out.push_back(read_sequence(p, shape, filter));
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

std::string join_ints(const std::vector<int>& v) {
    if (v.empty()) return "none";
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string join_strings(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
}

std::vector<std::string_view> split_commas(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

struct Field {
    std::function<void(std::string_view)> set;
    std::function<std::string()> get;
};

[[noreturn]] void bad_value(const std::string& key, std::string_view value, const char* expected) {
    throw ConfigError("config key '" + key + "': expected " + expected + ", got '" + std::string(value) + "'");
}

Field real_field(const std::string& key, double& target) {
    return {[&target, key](std::string_view v) {
                auto x = parse_number<double>(v);
                if (!x) bad_value(key, v, "a number");
                target = *x;
            },
            [&target] { return format_real(target); }};
}

template <class I>
Field int_field(const std::string& key, I& target) {
    return {[&target, key](std::string_view v) {
                auto x = parse_number<I>(v);
                if (!x) bad_value(key, v, "an integer");
                target = *x;
            },
            [&target] { return std::to_string(target); }};
}

Field int_list_field(const std::string& key, std::vector<int>& target) {
    return {[&target, key](std::string_view v) {
                target.clear();
                if (v == "none") return;
                for (auto part : split_commas(v)) {
                    auto x = parse_number<int>(part);
                    if (!x) bad_value(key, v, "a comma-separated list of integers or 'none'");
                    target.push_back(*x);
                }
            },
            [&target] { return join_ints(target); }};
}

Field radius_field(const std::string& key, std::optional<double>& target) {
    return {[&target, key](std::string_view v) {
                if (v == "none") {
                    target.reset();
                    return;
                }
                auto x = parse_number<double>(v);
                if (!x || *x < 0.0) bad_value(key, v, "a nonnegative number or 'none'");
                target = *x;
            },
            [&target] { return target ? format_real(*target) : std::string("none"); }};
}

std::vector<std::pair<std::string, Field>> config_fields(RunConfig& c) {
    std::vector<std::pair<std::string, Field>> f;
    auto add = [&](const std::string& key, Field field) { f.emplace_back(key, std::move(field)); };
    add("model.blocks", int_field("model.blocks", c.model.blocks));
    add("model.block_length", int_field("model.block_length", c.model.block_length));
    add("model.det_hidden", int_list_field("model.det_hidden", c.model.det_hidden));
    add("model.bev_hidden", int_list_field("model.bev_hidden", c.model.bev_hidden));
    add("model.fv_hidden", int_list_field("model.fv_hidden", c.model.fv_hidden));
    add("bev.rows", int_field("bev.rows", c.model.features.bev.rows));
    add("bev.cols", int_field("bev.cols", c.model.features.bev.cols));
    add("bev.meters_per_cell", real_field("bev.meters_per_cell", c.model.features.bev.meters_per_cell));
    add("bev.x_min", real_field("bev.x_min", c.model.features.bev.x_min));
    add("bev.y_min", real_field("bev.y_min", c.model.features.bev.y_min));
    add("fv.rows", int_field("fv.rows", c.model.features.fv.rows));
    add("fv.cols", int_field("fv.cols", c.model.features.fv.cols));
    add("window.length", int_field("window.length", c.windows.window_length));
    add("window.gate_radius", radius_field("window.gate_radius", c.windows.gate.radius_m));
    add("window.gold_iou", real_field("window.gold_iou", c.windows.gold_iou_threshold));
    add("train.iterations", int_field("train.iterations", c.train.iterations));
    add("train.batch_size", int_field("train.batch_size", c.train.batch_size));
    add("train.seed", int_field("train.seed", c.train.seed));
    add("train.init_stddev", real_field("train.init_stddev", c.train.init_stddev));
    add("train.lr", real_field("train.lr", c.train.adam.lr));
    add("train.beta1", real_field("train.beta1", c.train.adam.beta1));
    add("train.beta2", real_field("train.beta2", c.train.adam.beta2));
    add("train.epsilon", real_field("train.epsilon", c.train.adam.epsilon));
    add("train.hamming_det", real_field("train.hamming_det", c.train.hamming.det));
    add("train.hamming_link", real_field("train.hamming_link", c.train.hamming.link));
    add("train.hamming_new", real_field("train.hamming_new", c.train.hamming.new_track));
    add("train.hamming_end", real_field("train.hamming_end", c.train.hamming.end_track));
    add("train.search_min", real_field("train.search_min", c.train.search_min));
    add("train.search_max", real_field("train.search_max", c.train.search_max));
    add("train.search_step", real_field("train.search_step", c.train.search_step));
    add("track.window_length", int_field("track.window_length", c.track.window_length));
    add("track.gate_radius", radius_field("track.gate_radius", c.track.gate.radius_m));
    add("eval.criterion",
        {[&c](std::string_view v) {
             if (v == "iou_2d") c.eval.criterion = MatchCriterion::iou_2d;
             else if (v == "center_distance_3d") c.eval.criterion = MatchCriterion::center_distance_3d;
             else bad_value("eval.criterion", v, "iou_2d or center_distance_3d");
         },
         [&c] { return std::string(c.eval.criterion == MatchCriterion::iou_2d ? "iou_2d" : "center_distance_3d"); }});
    add("eval.iou_threshold", real_field("eval.iou_threshold", c.eval.iou_threshold));
    add("eval.distance_threshold", real_field("eval.distance_threshold", c.eval.distance_threshold_m));
    add("labels.types", {[&c](std::string_view v) {
                             c.labels.types.clear();
                             for (auto part : split_commas(v)) {
                                 if (part.empty()) bad_value("labels.types", v, "a comma-separated list of types");
                                 c.labels.types.emplace_back(part);
                             }
                         },
                         [&c] { return join_strings(c.labels.types); }});
    add("bench.pair_split_percent", int_field("bench.pair_split_percent", c.pair_split_percent));
    return f;
}

void validate_config(const RunConfig& c) {
    c.model.validate();
    if (c.windows.window_length < 0 || c.track.window_length < 0) throw ConfigError("window lengths must be >= 0");
    if (c.train.iterations < 0 || c.train.batch_size < 0) throw ConfigError("train.iterations and train.batch_size must be >= 0");
    if (!(c.train.adam.lr > 0.0)) throw ConfigError("config key 'train.lr' must be positive");
    if (c.pair_split_percent <= 0 || c.pair_split_percent >= 100) {
        throw ConfigError("config key 'bench.pair_split_percent' must lie in (0, 100)");
    }
}

} // namespace

RunConfig parse_config(std::string_view text) {
    RunConfig config;
    auto fields = config_fields(config);
    std::set<std::string> seen;
    std::istringstream in{std::string(text)};
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(number) + ": expected `key = value`");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));
        auto it = std::find_if(fields.begin(), fields.end(), [&](const auto& f) { return f.first == key; });
        if (it == fields.end()) throw ConfigError("unknown config key '" + key + "' on line " + std::to_string(number));
        if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'");
        if (value.empty()) throw ConfigError("config key '" + key + "' is missing its value");
        it->second.set(value);
    }
    validate_config(config);
    return config;
}

RunConfig read_config(const fs::path& path) { return parse_config(read_file(path)); }

std::string echo_config(const RunConfig& config) {
    RunConfig copy = config;
    std::string out;
    for (const auto& [key, field] : config_fields(copy)) out += key + " = " + field.get() + "\n";
    return out;
}

void save_checkpoint(const fs::path& path, const CostModel& model) { write_file_atomic(path, serialize_model(model)); }

CostModel load_checkpoint(const fs::path& path) {
    try {
        return deserialize_model(read_file(path));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

} // namespace dsmt
