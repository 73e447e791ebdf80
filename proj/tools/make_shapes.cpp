// Writes the procedural test surfaces as OBJ files.

#include "neurcross/shapes.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace neurcross;

namespace {

void write_quads(const std::filesystem::path& path, const QuadMesh& q)
{
    std::vector<std::vector<int>> faces;
    for (const auto& c : q.quads)
        faces.push_back({c[0], c[1], c[2], c[3]});
    write_obj(path, q.vertices, faces);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Generate test meshes"};
    std::string shape, out;
    int level = 3, n1 = 0, n2 = 0;
    double a = 0.0, b = 0.0;
    std::uint64_t shuffle = 0;
    app.add_option("shape", shape,
                   "icosphere | bumpy | torus | cylinder | genus2 | grid | quad-grid | quad-sphere | quad-cube")
        ->required();
    app.add_option("out", out, "Output OBJ")->required();
    app.add_option("--level", level, "Subdivision level (icosphere, bumpy)");
    app.add_option("--n1", n1, "First resolution (torus major / cylinder around / grid x)");
    app.add_option("--n2", n2, "Second resolution (torus minor / cylinder along / grid y)");
    app.add_option("--a", a, "First size parameter (radius, major radius, amplitude)");
    app.add_option("--b", b, "Second size parameter (minor radius, height)");
    app.add_option("--shuffle", shuffle, "Seed for rotating face starts (0 keeps them)");
    CLI11_PARSE(app, argc, argv);

    try {
        TriMesh m;
        if (shape == "icosphere")
            m = shapes::icosphere(level, a > 0 ? a : 0.5);
        else if (shape == "bumpy")
            m = shapes::bumpy_sphere(level, 0.5, a > 0 ? a : 0.02, n1 > 0 ? n1 : 4);
        else if (shape == "torus")
            m = shapes::torus(a > 0 ? a : 0.35, b > 0 ? b : 0.15, n1 > 0 ? n1 : 67, n2 > 0 ? n2 : 30);
        else if (shape == "cylinder")
            m = shapes::cylinder(a > 0 ? a : 0.2, b > 0 ? b : 1.0, n1 > 0 ? n1 : 40, n2 > 0 ? n2 : 30);
        else if (shape == "genus2")
            m = shapes::genus2(n1 > 0 ? n1 : 8);
        else if (shape == "grid")
            m = shapes::flat_grid(n1 > 0 ? n1 : 8, n2 > 0 ? n2 : 8);
        else if (shape == "quad-grid") {
            write_quads(out, shapes::quad_grid(n1 > 0 ? n1 : 8, n2 > 0 ? n2 : 8));
            return 0;
        } else if (shape == "quad-sphere") {
            write_quads(out, shapes::quad_sphere(n1 > 0 ? n1 : 8, a > 0 ? a : 0.5));
            return 0;
        } else if (shape == "quad-cube") {
            write_quads(out, shapes::quad_cube(a > 0 ? a : 1.0));
            return 0;
        } else
            throw Error("unknown shape '" + shape + "'");
        if (shuffle != 0)
            m = shapes::shuffle_face_starts(m, shuffle);
        write_obj(out, m);
        std::cerr << m.face_count() << " faces, chi = " << m.euler_characteristic() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
