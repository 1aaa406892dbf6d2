// Placeholder entry point; the real command set lands with the pipeline.
int main() { return 0; }
