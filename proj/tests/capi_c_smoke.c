#include <tgforge/tgforge.h>

#include <stdio.h>
#include <stdlib.h>

static int count_progress(const tgf_progress *progress, void *user_data) {
  int *calls = (int *)user_data;
  (void)progress;
  ++*calls;
  return 0;
}

int main(int argc, char **argv) {
  tgf_graph *graph = NULL;
  tgf_layout *layout = NULL;
  tgf_layout_params params;
  char *json = NULL;
  double xyz[9];
  int calls = 0;

  if (argc != 2) {
    fprintf(stderr, "usage: %s graph.json\n", argv[0]);
    return 2;
  }
  if (tgf_graph_load(argv[1], 0, &graph) != TGF_OK) {
    fprintf(stderr, "load failed: %s\n", tgf_last_error());
    return 1;
  }
  tgf_layout_params_default(&params);
  params.seed = 7;
  if (tgf_layout_run(graph, &params, 1, count_progress, &calls, &layout) != TGF_OK) {
    fprintf(stderr, "layout failed: %s\n", tgf_last_error());
    return 1;
  }
  if (tgf_layout_positions(layout, xyz, 3) != 3 || calls != tgf_layout_iterations(layout) ||
      !tgf_layout_converged(layout)) {
    fprintf(stderr, "unexpected layout result\n");
    return 1;
  }
  if (tgf_layout_serialize(graph, layout, &json) != TGF_OK) return 1;
  printf("%s\n", json);
  tgf_string_free(json);
  tgf_layout_free(layout);
  tgf_graph_free(graph);
  return 0;
}
