// Regenerates the committed golden tile fixture. Run only when the tile
// format changes on purpose: build the golden_gen target and pass the
// output path (tests/golden/golden.tile).
#include <cstdio>

#include "golden_fixture.hpp"
#include "risktrace/tile.hpp"

int main(int argc, char** argv) {
    if (argc != 2) {
        std::fprintf(stderr, "usage: golden_gen <output-path>\n");
        return 2;
    }
    risktrace::write_tile_file(argv[1], risktrace::test::golden_map());
    return 0;
}
