import React from 'react';
import { useState } from "react";
const fs = require('fs');

// A counter component.
export function Counter(props) {
  const [n, setN] = useState(0);
  const re = /ab+c/g;
  return n;
}

class Store {
  /* load state */
  load(key) {
    return fs.readFileSync(key);
  }
}
