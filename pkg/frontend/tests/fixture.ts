import { readFileSync } from 'node:fs';
import { DemoFixture } from '../src/api.js';

export function loadFixture(): DemoFixture {
  const url = new URL('../fixtures/demo.json', import.meta.url);
  return JSON.parse(readFileSync(url, 'utf8')) as DemoFixture;
}
