using System;
using System.Collections.Generic;

namespace Demo
{
    // entry point
    public class Program
    {
        public static void Main(string[] args)
        {
            var s = @"c:\temp";
            Console.WriteLine(s);
        }

        /* helper */
        private int Add(int a, int b) => a + b;

        public int Size { get; set; }
    }
}
