package queue;

enum Kind {
  FIFO {
    @Override
    String label() {
      return "fifo";
    }
  },
  LIFO;

  String label() {
    return name().toLowerCase();
  }
}
