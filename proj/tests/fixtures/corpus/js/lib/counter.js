export class Counter {
  #count = 0;

  // Increments the counter.
  increment() {
    this.#count += 1;
    return this;
  }

  get value() {
    return this.#count;
  }

  static from(n) {
    const c = new Counter();
    for (let i = 0; i < n; i++) c.increment();
    return c;
  }
}

export const helpers = {
  /* Resets a counter. */
  reset(c) {
    return new Counter();
  },
  label: function (c) {
    return `count=${c.value}`;
  },
};

Counter.prototype.describe = function () {
  return 'counter';
};
